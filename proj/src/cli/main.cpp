#include "newsent/pipeline.hpp"

int main(int argc, char** argv) {
    return newsent::cli(std::vector<std::string>(argv + 1, argv + argc));
}
