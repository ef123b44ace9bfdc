#pragma once

#include <stdexcept>
#include <string>

namespace residue_lab {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotSquarefree : public Error {
 public:
  using Error::Error;
};

class NonInvertible : public Error {
 public:
  using Error::Error;
};

class NonCoprimeModuli : public Error {
 public:
  using Error::Error;
};

// gcd(a, r) != 1 where a reduced fraction was required.
class NonCoprime : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

// An expansion whose denominators are phi_D(r) was requested with phi_D(q) = 0.
class ZeroDensity : public Error {
 public:
  using Error::Error;
};

class EmptySet : public Error {
 public:
  using Error::Error;
};

class EvenModulus : public Error {
 public:
  using Error::Error;
};

class InsufficientPrimes : public Error {
 public:
  using Error::Error;
};

class PreconditionViolated : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace residue_lab
