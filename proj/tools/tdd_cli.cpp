// Batch driver: runs one scenario command per invocation and writes CSV
// artifacts plus a key=value summary into the output directory.

#include <CLI11.hpp>

#include "tdd/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"hidden-string scenario driver"};
    std::string config, out = "out", command;
    int threads = 1;
    app.add_option("--config", config, "scenario config file")->required();
    app.add_option("--command", command,
                   "pdc-check | coupling | simulate | compare | brillouin | maxwell1d")
        ->required();
    app.add_option("--out", out, "artifact directory");
    app.add_option("--threads", threads, "worker threads (deterministic per value)")
        ->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);
    return tdd::run_scenario(config, command, out, threads);
}
