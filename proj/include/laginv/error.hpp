#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace laginv {

// Base class for every failure raised by the library. `stage` names the
// pipeline step (parse, diagnose, compute, ...) and ends up in the CLI
// error envelope.
class error : public std::runtime_error {
public:
    error(std::string stage, const std::string& what)
        : std::runtime_error(what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

class parse_error : public error {
public:
    parse_error(std::size_t position, const std::string& what)
        : error("parse", what), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

// A non-finite value showed up where a regular point was required (pole,
// log of zero, overflow of an intermediate).
class singularity_error : public error {
public:
    explicit singularity_error(const std::string& what) : error("compute", what) {}
};

class domain_error : public error {
public:
    explicit domain_error(const std::string& what) : error("compute", what) {}
};

class overflow_error : public error {
public:
    explicit overflow_error(const std::string& what) : error("compute", what) {}
};

// Raised when the coefficient diagnostics reject a series. Carries the partial
// sums computed so far so callers can still report them.
class divergence_error : public error {
public:
    divergence_error(const std::string& what, std::vector<double> partial_sums)
        : error("diagnose", what), partial_sums_(std::move(partial_sums)) {}

    const std::vector<double>& partial_sums() const noexcept { return partial_sums_; }

private:
    std::vector<double> partial_sums_;
};

class convergence_error : public error {
public:
    convergence_error(const std::string& what, double previous, double last)
        : error("compute", what), previous_(previous), last_(last) {}

    double previous() const noexcept { return previous_; }
    double last() const noexcept { return last_; }

private:
    double previous_;
    double last_;
};

} // namespace laginv
