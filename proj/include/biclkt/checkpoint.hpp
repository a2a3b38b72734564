#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "biclkt/matrix.hpp"
#include "biclkt/tape.hpp"

namespace biclkt {

// Named-tensor container: string metadata plus (name, shape, row-major
// values) entries in insertion order. Values round-trip bit-exactly, NaN
// payloads and signed zeros included.
struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, Matrix>> tensors;

  void add(const std::string& name, const Matrix& m);  // duplicate name throws
  const Matrix* find(const std::string& name) const;   // nullptr when absent
};

// Binary format, version-tagged; readers reject unknown versions and
// truncated or corrupt payloads.
void write_checkpoint(const Checkpoint& c, std::ostream& out);
Checkpoint read_checkpoint(std::istream& in);

// File convenience wrappers. Reading a missing path names it.
void save_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Snapshot a named parameter set / restore one in place. Loading matches
// by name and requires identical shapes; anything absent or misshapen
// makes the checkpoint unusable for these params.
Checkpoint checkpoint_params(const std::vector<Param*>& params);
void load_params(const Checkpoint& c, const std::vector<Param*>& params);

}  // namespace biclkt
