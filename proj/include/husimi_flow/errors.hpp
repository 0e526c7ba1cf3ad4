#pragma once

#include <stdexcept>
#include <string>

namespace husimi_flow {

/// Base class for failures of the simulated physics (as opposed to bad input).
class PhysicsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NormLossError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

/// Wavefunction amplitude reached the periodic boundary of the coordinate grid.
class BoundaryContaminationError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class EnergyDriftError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class ConvergenceError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

}  // namespace husimi_flow
