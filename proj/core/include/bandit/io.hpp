#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bandit/errors.hpp"
#include "bandit/linalg.hpp"
#include "bandit/model.hpp"

namespace bandit {

/// Malformed document. `location` is a JSON pointer (e.g. /bandits/1/p/2)
/// or a byte offset for syntax errors.
class ParseError : public InvalidInput {
 public:
  ParseError(std::string source, std::string location, const std::string& message)
      : InvalidInput(source + ":" + location + ": " + message),
        source_(std::move(source)),
        location_(std::move(location)) {}

  const std::string& source() const { return source_; }
  const std::string& location() const { return location_; }

 private:
  std::string source_;
  std::string location_;
};

/// Reward types, bounds and start of a constrained problem. rewards[w] has
/// one entry per global state.
struct ConstraintSpec {
  std::vector<Vector> rewards;
  std::vector<double> bounds;
  std::optional<MultiState> start;
};

struct InstanceDocument {
  Instance instance;
  std::optional<MultiState> start;
  std::optional<ConstraintSpec> constraints;
};

/// Instance document:
///   { "hypothesis": "RN"|"RA"|"RS",
///     "utility": {"type": "linear", "discount": c} | {"type": "risk_averse"|"risk_seeking", "lambda": l},
///     "bandits": [ {"p": [[..]], "x0": [..], "x": [[..]]} | {"r": [..], "q": [[..]]}, ... ],
///     "start": [..], "constraints": {..} }
/// Raw bandits need a utility (default linear); pre-built bandits need a
/// hypothesis. Unknown keys are rejected.
InstanceDocument parse_instance(std::string_view text, const std::string& source = "<input>");
InstanceDocument read_instance(const std::filesystem::path& path);

/// { "rewards": [[..], ..] | {"0": [..], "1": [..], ..}, "bounds": [..], "start": [..] }
/// Each reward vector is flat over global states or nested per bandit.
ConstraintSpec parse_constraints(std::string_view text, const Instance& instance,
                                 const std::string& source = "<input>");
ConstraintSpec read_constraints(const std::filesystem::path& path, const Instance& instance);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace bandit
