#include "spdefem/config.hpp"

int main(int argc, char** argv)
{
    return spdefem::run_cli(argc, argv);
}
