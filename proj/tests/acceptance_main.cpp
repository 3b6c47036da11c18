#include <iostream>
#include <vector>

#include <CLI11.hpp>

#include "brakelab/acceptance.hpp"

int main(int argc, char** argv) {
    CLI::App app{"acceptance suite"};
    std::vector<int> only;
    brakelab::AcceptanceOptions opt;
    app.add_option("--only", only, "criterion ids to run");
    app.add_option("--seed", opt.seed, "sampling seed");
    app.add_option("--threads", opt.threads, "worker threads")->check(CLI::Range(1, 1024));
    CLI11_PARSE(app, argc, argv);

    auto ids = only.empty() ? brakelab::criterion_ids() : only;
    int failed = 0;
    brakelab::run_acceptance(ids, opt, [&](const brakelab::CriterionResult& r) {
        failed += !r.pass;
        std::cout << brakelab::format_result(r) << std::endl;
    });
    std::cout << ids.size() - failed << "/" << ids.size() << " criteria passed" << std::endl;
    return failed ? 1 : 0;
}
