#pragma once

#include <iosfwd>

#include "json.hpp"
#include "proofmatch/encoder.hpp"
#include "proofmatch/training.hpp"

namespace proofmatch {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kData = 2;
inline constexpr int kDiverged = 3;
}  // namespace exit_code

// Contents of the JSON file passed to `train --config`:
//   {"encoder": {...EncoderConfig fields except vocab_size...},
//    "train": {...TrainConfig fields...},
//    "vocab_min_freq": 2}
// Every key is optional; unknown keys are rejected with DataError.
struct ExperimentConfig {
  EncoderConfig encoder;
  TrainConfig train;
  std::size_t vocab_min_freq = 2;
};

ExperimentConfig parse_experiment_config(const nlohmann::json& object);

// Entry point of the `proofmatch` tool: extract | split | stats | synth |
// baseline | train | evaluate. Returns one of the exit codes above.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace proofmatch
