#pragma once

#include <stdexcept>
#include <string>

namespace twr {

// Precondition violations on public entry points.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Target placement or wall layout that cannot be realised on the grid.
class InvalidScene : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SimulationDiverged : public std::runtime_error {
 public:
  SimulationDiverged(long step, const std::string& what)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

class DegenerateSignal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TooFewSamples : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Corrupt, truncated or incompatible dataset / checkpoint files.
class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch, const std::string& what)
      : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace twr
