#pragma once
#include <stdexcept>
#include <string>

namespace brakelab {

enum class Errc {
    ok = 0,
    invalid_argument = 1,
    domain = 2,
    singularity = 3,
    triple_collision = 4,
    no_syzygy = 5,
    step_underflow = 6,
    not_converged = 7,
    no_bracket = 8,
    internal = 9,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

} // namespace brakelab
