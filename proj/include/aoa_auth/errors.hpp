#pragma once

#include <stdexcept>
#include <string>

namespace aoa_auth {

/// Pipeline stage that raised an error; the CLI maps it to an exit code
/// and names it in the diagnostic.
enum class Stage { config, simulation, training, io };

inline const char* stage_name(Stage s) {
  switch (s) {
    case Stage::config: return "config";
    case Stage::simulation: return "simulation";
    case Stage::training: return "training";
    case Stage::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Stage stage, const std::string& what)
      : std::runtime_error(what), stage_(stage) {}
  Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(Stage::config, what) {}
};

struct SimulationError : Error {
  explicit SimulationError(const std::string& what)
      : Error(Stage::simulation, what) {}
};

struct TrainingError : Error {
  explicit TrainingError(const std::string& what)
      : Error(Stage::training, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(Stage::io, what) {}
};

}  // namespace aoa_auth
