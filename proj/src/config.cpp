#include "spdefem/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "spdefem/error.hpp"

namespace spdefem {

namespace {

using nlohmann::json;

const std::set<std::string> kKnownKeys{"dim",     "extent",    "rho",     "sigmas", "sqrt_matrix",
                                       "f",       "p",         "levels",  "samples", "seed",
                                       "reference", "threads", "tolerance", "picard"};

CovarianceSpec covariance_from_json(const json& j)
{
    const int given = static_cast<int>(j.contains("rho")) + static_cast<int>(j.contains("sigmas")) +
                      static_cast<int>(j.contains("sqrt_matrix"));
    if (given != 1)
        throw ConfigError("config must give exactly one of rho, sigmas, sqrt_matrix");
    if (j.contains("rho"))
        return PowerLaw{j.at("rho").get<double>()};
    if (j.contains("sigmas"))
        return Diagonal{j.at("sigmas").get<std::vector<double>>()};

    const auto rows = j.at("sqrt_matrix").get<std::vector<std::vector<double>>>();
    General g;
    g.sqrt_coeffs.resize(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size())
            throw ConfigError("sqrt_matrix rows differ in length");
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            g.sqrt_coeffs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    return g;
}

ReferenceKind reference_kind_from_string(const std::string& s)
{
    if (s == "auto")
        return ReferenceKind::Auto;
    if (s == "spectral")
        return ReferenceKind::Spectral;
    if (s == "fine-fem")
        return ReferenceKind::FineFem;
    throw ConfigError("unknown reference kind '" + s + "' (expected auto, spectral or fine-fem)");
}

StudyConfig from_json_unchecked(const json& j)
{
    if (!j.is_object())
        throw ConfigError("config root must be a table/object");
    for (const auto& [key, value] : j.items()) {
        if (!kKnownKeys.contains(key))
            throw ConfigError("unknown config key '" + key + "'");
    }

    StudyConfig c;
    c.domain.dim = j.at("dim").get<int>();
    if (j.contains("extent")) {
        const auto ext = j.at("extent").get<std::vector<double>>();
        if (ext.size() != static_cast<std::size_t>(c.domain.dim))
            throw ConfigError("extent must list one length per dimension");
        for (std::size_t k = 0; k < ext.size(); ++k)
            c.domain.extent[k] = ext[k];
    }
    c.domain.validate();
    c.covariance = covariance_from_json(j);

    if (j.contains("f")) {
        const auto& f = j.at("f");
        c.f.kind = nonlinearity_kind_from_string(f.at("kind").get<std::string>());
        c.f.c = f.value("c", 0.0);
    }
    c.p = j.value("p", 2.0);

    for (const auto& entry : j.at("levels")) {
        if (entry.is_number_integer()) {
            const std::size_t n_modes = entry.get<std::size_t>();
            c.levels.push_back(coupled_levels(c.domain.dim, std::span<const std::size_t>(&n_modes, 1)).front());
            continue;
        }
        const auto pair = entry.get<std::vector<long>>();
        if (pair.size() != 2 || pair[0] <= 0 || pair[1] <= 0)
            throw ConfigError("each level must be [N, n_per_side] with positive entries");
        c.levels.push_back({static_cast<std::size_t>(pair[0]), static_cast<int>(pair[1])});
    }
    c.samples = j.at("samples").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();

    if (j.contains("reference")) {
        const auto& r = j.at("reference");
        c.reference.n_mult = r.value("n_mult", c.reference.n_mult);
        c.reference.refinements = r.value("refinements", c.reference.refinements);
        if (r.contains("kind"))
            c.reference.kind = reference_kind_from_string(r.at("kind").get<std::string>());
    }
    if (j.contains("picard")) {
        const auto& pc = j.at("picard");
        c.picard.tol = pc.value("tol", c.picard.tol);
        c.picard.max_iter = pc.value("max_iter", c.picard.max_iter);
        c.picard.cg_tol = pc.value("cg_tol", c.picard.cg_tol);
        const auto solver = pc.value("solver", std::string("direct"));
        if (solver == "direct")
            c.picard.linear_solver = LinearSolver::Direct;
        else if (solver == "cg")
            c.picard.linear_solver = LinearSolver::ConjugateGradient;
        else
            throw ConfigError("unknown linear solver '" + solver + "' (expected direct or cg)");
    }
    c.threads = j.value("threads", 0);
    c.rate_tolerance = j.value("tolerance", c.rate_tolerance);
    return c;
}

}  // namespace

StudyConfig study_config_from_json(const json& j)
{
    try {
        return from_json_unchecked(j);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
}

StudyConfig parse_study_config(const std::string& text, const std::string& format)
{
    if (format == "toml") {
        std::ostringstream as_json;
        try {
            const auto table = toml::parse(text);
            as_json << toml::json_formatter{table};
        } catch (const toml::parse_error& e) {
            throw ConfigError(fmt::format("malformed TOML config: {} (line {})", e.description(),
                                          e.source().begin.line));
        }
        return parse_study_config(as_json.str(), "json");
    }
    if (format != "json")
        throw ConfigError("unknown config format '" + format + "'");
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON config: ") + e.what());
    }
    return study_config_from_json(j);
}

StudyConfig load_study_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const bool toml = path.size() >= 5 && path.compare(path.size() - 5, 5, ".toml") == 0;
    return parse_study_config(buf.str(), toml ? "toml" : "json");
}

}  // namespace spdefem
