// Command-line front end. Subcommands are registered as the library grows;
// until then this stub reports usage.
#include <cstdio>

int main(int argc, char** argv) {
    (void)argv;
    if (argc < 2) {
        std::fprintf(stderr, "usage: xprod <command> [options]\n");
        return 2;
    }
    std::fprintf(stderr, "xprod: no commands wired yet\n");
    return 2;
}
