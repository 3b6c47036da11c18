#include "brakelab/integrate.hpp"

namespace brakelab {

const char* stop_reason_name(StopReason r) {
    switch (r) {
    case StopReason::completed: return "completed";
    case StopReason::terminal_event: return "terminal event";
    case StopReason::step_underflow: return "step underflow";
    case StopReason::nonfinite: return "non-finite field";
    case StopReason::max_steps: return "step budget exhausted";
    case StopReason::stopped: return "stopped";
    }
    return "unknown";
}

} // namespace brakelab
