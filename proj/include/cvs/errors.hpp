#pragma once

#include <stdexcept>
#include <string>

namespace cvs {

// Argument outside the mathematical domain of an operation (index out of
// range, node outside [0,1], negative eigenvalue, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class BasisMismatch : public DomainError {
 public:
  using DomainError::DomainError;
};

class UnsupportedFamily : public DomainError {
 public:
  using DomainError::DomainError;
};

// The Gram matrix of a design could not be factorized within the jitter
// budget. Usually means duplicate or near-duplicate nodes.
class SingularDesign : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SamplerStall : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A quantity that must be nonnegative came out clearly negative.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cvs
