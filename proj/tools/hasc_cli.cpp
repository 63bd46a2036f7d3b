#include "hasc/cli.hpp"

int main(int argc, char** argv)
{
    return hasc::dispatch(argc, argv);
}
