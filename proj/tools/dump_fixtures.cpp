#include <iostream>

#include "opetri/fixtures.hpp"

// Regenerates the example corpus under fixtures/ (or a given directory).
int main(int argc, char** argv) {
    const std::string dir = argc > 1 ? argv[1] : "fixtures";
    try {
        opetri::fixtures::write_fixture_corpus(dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cout << "wrote fixture corpus to " << dir << "\n";
    return 0;
}
