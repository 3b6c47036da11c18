#pragma once
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace brakelab {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0;
    double limit_seconds = 0; // 0: no runtime bound
};

struct AcceptanceOptions {
    int threads = 1;
    std::uint64_t seed = 1;
};

std::vector<int> criterion_ids();
std::string criterion_name(int id);
double criterion_time_limit(int id);

// A criterion passes when every assertion holds and it finished inside its time limit.
CriterionResult run_criterion(int id, const AcceptanceOptions& opt = {});

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids, const AcceptanceOptions& opt = {},
                                            const std::function<void(const CriterionResult&)>& on_result = {});

std::string format_result(const CriterionResult& r);

} // namespace brakelab
