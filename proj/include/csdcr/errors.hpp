#pragma once

#include <stdexcept>
#include <string>

namespace csdcr {

/// Base class for every rejection raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scenario, grid or band description that violates its invariants.
class InvalidSpec : public Error {
 public:
  using Error::Error;
};

/// A configuration value out of range (frontend, solver, sweep, config file).
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

/// Pattern construction or pattern file problems.
class InvalidPattern : public Error {
 public:
  using Error::Error;
};

/// Every sample of an acquisition was dropped.
class UnusableAcquisition : public Error {
 public:
  using Error::Error;
};

/// Pattern search where no candidate ever reconstructs successfully.
class InfeasibleBrief : public Error {
 public:
  using Error::Error;
};

}  // namespace csdcr
