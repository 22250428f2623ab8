#include "fixturegen.hpp"

#include <cstdio>

int main(int argc, char** argv) {
    std::filesystem::path dir = argc > 1 ? argv[1] : "data/fixtures";
    newsent::write_all_fixtures(dir);
    std::printf("fixtures written to %s\n", dir.string().c_str());
    return 0;
}
