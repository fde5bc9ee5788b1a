#pragma once

#include <stdexcept>
#include <string>

namespace fracvar {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (mesh, surface, config).
class ParseError : public Error {
public:
  using Error::Error;
};

/// Input parsed but violates a structural invariant (inverted tet, bad tags, ...).
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Requested crack set is not a subset of the candidate faces.
class TopologyError : public Error {
public:
  using Error::Error;
};

/// Evaluation requested on the infinite-energy region (det <= 0).
class DomainError : public Error {
public:
  using Error::Error;
};

class GeometryError : public Error {
public:
  using Error::Error;
};

class ValueError : public Error {
public:
  using Error::Error;
};

class NonManifoldError : public Error {
public:
  using Error::Error;
};

class ResolutionError : public Error {
public:
  using Error::Error;
};

/// Every crack candidate failed the admissibility checks.
class NoFeasibleCandidate : public Error {
public:
  using Error::Error;
};

} // namespace fracvar
