#pragma once

#include <stdexcept>
#include <string>

namespace vmulti {

struct NonCommuting : std::runtime_error {
    explicit NonCommuting(const std::string& what) : std::runtime_error(what) {}
};

struct IrrationalSpectrum : std::runtime_error {
    explicit IrrationalSpectrum(const std::string& what) : std::runtime_error(what) {}
};

struct NotNilpotent : std::runtime_error {
    explicit NotNilpotent(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a lattice-window computation fails to produce identical
// answers at window W and W+1.
struct WindowTooSmall : std::runtime_error {
    explicit WindowTooSmall(const std::string& what) : std::runtime_error(what) {}
};

// Verdict of a checked identity; `ok` plus a human-readable reason for the
// first violation found.
struct Verdict {
    bool ok = true;
    std::string detail;
    static Verdict pass() { return {true, ""}; }
    static Verdict fail(std::string why) { return {false, std::move(why)}; }
    explicit operator bool() const { return ok; }
};

}  // namespace vmulti
