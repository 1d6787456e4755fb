#ifndef RVAS_ERROR_HPP
#define RVAS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace rvas {

// Invalid argument / violated type invariant. CLI maps this to exit code 3.
class domain_error : public std::invalid_argument {
 public:
  explicit domain_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Numerical failure (non-convergence, degenerate statistic, infeasible grid).
// Carries the iteration count where one is meaningful. CLI exit code 4.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& msg, long iterations = -1)
      : std::runtime_error(iterations >= 0
                               ? msg + " (after " + std::to_string(iterations) + " iterations)"
                               : msg),
        iterations_(iterations) {}
  long iterations() const noexcept { return iterations_; }

 private:
  long iterations_;
};

class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {
inline void require(bool cond, const std::string& msg) {
  if (!cond) throw domain_error(msg);
}
}  // namespace detail

}  // namespace rvas

#endif  // RVAS_ERROR_HPP
