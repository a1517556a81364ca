#pragma once

#include <string>

#include "calabi/profile.hpp"

namespace calabi {

/// One saved profile. Derivatives are recomputed on load.
struct Checkpoint {
  int n = 2;
  int k = 1;
  CalabiProfile profile;
};

/// Profile saved at t_j = T (1 - 2^{-j}).
struct IndexedProfile {
  int j = 0;
  CalabiProfile profile;
};

/// "checkpoint_jNN.json"
std::string checkpoint_filename(int j);

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// {"version":1,"n","k","t","a","b","L","N","u":[...]} with every real
/// written to 36 significant digits so binary128 values round-trip.
std::string checkpoint_json(const Checkpoint& c);
void write_checkpoint(const Checkpoint& c, const std::string& path);

/// Throws CheckpointError on malformed input, a version other than 1, a grid
/// the RhoGrid constructor rejects, or a u array of the wrong length.
Checkpoint parse_checkpoint(const std::string& text);
Checkpoint read_checkpoint(const std::string& path);

}  // namespace calabi
