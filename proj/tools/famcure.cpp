#include "famcure/app.hpp"

int main(int argc, char** argv) {
    return famcure::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
