#ifndef SIMPLEX_EVAL_ERRORS_HPP
#define SIMPLEX_EVAL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace simplex_eval {

// Error taxonomy used across the library.  The command line tools map these
// onto distinct process exit codes, so the category a throw site picks is
// part of the public contract:
//
//   InputError       bad user-supplied data or configuration      (exit 2)
//   ConvergenceError an iterative procedure failed to converge    (exit 3)
//   ResamplingError  rejection sampling exhausted its attempt cap (exit 3)
//   InvariantError   an internal postcondition was violated       (exit 4)

class InputError : public std::runtime_error {
public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

class ConvergenceError : public std::runtime_error {
public:
  explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

class ResamplingError : public ConvergenceError {
public:
  explicit ResamplingError(const std::string& msg) : ConvergenceError(msg) {}
};

class InvariantError : public std::logic_error {
public:
  explicit InvariantError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace simplex_eval

#endif
