#pragma once

#include <stdexcept>
#include <string>

namespace dofnet {

// probability-zero degenerate channel/precoder draw; caller redraws or aborts
struct RankDeficient : std::runtime_error {
  explicit RankDeficient(const std::string& what) : std::runtime_error(what) {}
};

struct Singular : std::runtime_error {
  explicit Singular(const std::string& what) : std::runtime_error(what) {}
};

struct DomainError : std::domain_error {
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

struct IndexError : std::out_of_range {
  explicit IndexError(const std::string& what) : std::out_of_range(what) {}
};

// a scheme computation touched knowledge it cannot legally have
struct CausalityViolation : std::logic_error {
  explicit CausalityViolation(const std::string& what) : std::logic_error(what) {}
};

struct DecodeFailure : std::runtime_error {
  explicit DecodeFailure(const std::string& what) : std::runtime_error(what) {}
};

struct GroupingError : std::runtime_error {
  explicit GroupingError(const std::string& what) : std::runtime_error(what) {}
};

struct GranularityError : std::invalid_argument {
  explicit GranularityError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace dofnet
