#pragma once

#include <stdexcept>
#include <string>

namespace minkper {

// Configuration / input problems: the caller asked for something ill-posed.
// The CLI maps these to exit code 2.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Base for runtime numerical failures (exit code 3 in the CLI).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class StepSizeUnderflow : public NumericalError {
public:
    StepSizeUnderflow(double t_reached, const std::string& what)
        : NumericalError(what), t_reached(t_reached) {}
    double t_reached;
};

class NoConvergence : public NumericalError {
public:
    NoConvergence(double best_residual, const std::string& what)
        : NumericalError(what), best_residual(best_residual) {}
    double best_residual;
};

class SingularJacobian : public NumericalError {
public:
    SingularJacobian(double cond, const std::string& what)
        : NumericalError(what), cond(cond) {}
    double cond;
};

class BracketFailure : public NumericalError {
public:
    explicit BracketFailure(const std::string& what) : NumericalError(what) {}
};

class BranchLost : public NumericalError {
public:
    BranchLost(double lambda, const std::string& what)
        : NumericalError(what), lambda(lambda) {}
    double lambda;
};

class CorrectorDivergence : public NumericalError {
public:
    CorrectorDivergence(double lambda, const std::string& what)
        : NumericalError(what), lambda(lambda) {}
    double lambda; // last good branch point's parameter
};

class NoOrbit : public NumericalError {
public:
    explicit NoOrbit(const std::string& what) : NumericalError(what) {}
};

class TangentialZero : public NumericalError {
public:
    explicit TangentialZero(const std::string& what) : NumericalError(what) {}
};

} // namespace minkper
