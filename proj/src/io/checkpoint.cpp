#include "biclkt/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "biclkt/errors.hpp"

namespace biclkt {
namespace {

// Layout (host-endian doubles, fixed-width counts):
//   magic "BCLKTCKP" | u32 version | u32 n_meta | (kv strings) |
//   u32 n_tensors | per tensor: name string, u32 rows, u32 cols, raw doubles
// Strings are u32 length + bytes.
constexpr char kMagic[8] = {'B', 'C', 'L', 'K', 'T', 'C', 'K', 'P'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_str(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

uint32_t get_u32(std::istream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw ArtifactError("checkpoint truncated");
  return v;
}

std::string get_str(std::istream& in) {
  uint32_t n = get_u32(in);
  if (n > (1u << 20)) throw ArtifactError("checkpoint string length implausible");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw ArtifactError("checkpoint truncated");
  return s;
}

}  // namespace

void Checkpoint::add(const std::string& name, const Matrix& m) {
  if (find(name) != nullptr) throw ArtifactError("duplicate tensor name: " + name);
  tensors.emplace_back(name, m);
}

const Matrix* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, m] : tensors)
    if (n == name) return &m;
  return nullptr;
}

void write_checkpoint(const Checkpoint& c, std::ostream& out) {
  out.write(kMagic, sizeof kMagic);
  put_u32(out, kVersion);
  put_u32(out, static_cast<uint32_t>(c.meta.size()));
  for (const auto& [k, v] : c.meta) {
    put_str(out, k);
    put_str(out, v);
  }
  put_u32(out, static_cast<uint32_t>(c.tensors.size()));
  for (const auto& [name, m] : c.tensors) {
    put_str(out, name);
    put_u32(out, static_cast<uint32_t>(m.rows));
    put_u32(out, static_cast<uint32_t>(m.cols));
    out.write(reinterpret_cast<const char*>(m.data.data()),
              static_cast<std::streamsize>(m.data.size() * sizeof(double)));
  }
  if (!out) throw ArtifactError("checkpoint write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw ArtifactError("not a checkpoint file (bad magic)");
  uint32_t version = get_u32(in);
  if (version != kVersion)
    throw ArtifactError("unsupported checkpoint version " + std::to_string(version));
  Checkpoint c;
  uint32_t n_meta = get_u32(in);
  for (uint32_t i = 0; i < n_meta; ++i) {
    std::string k = get_str(in);
    c.meta[k] = get_str(in);
  }
  uint32_t n_tensors = get_u32(in);
  for (uint32_t i = 0; i < n_tensors; ++i) {
    std::string name = get_str(in);
    uint32_t rows = get_u32(in);
    uint32_t cols = get_u32(in);
    if (rows > (1u << 24) || cols > (1u << 24))
      throw ArtifactError("checkpoint tensor shape implausible: " + name);
    Matrix m(static_cast<int>(rows), static_cast<int>(cols));
    in.read(reinterpret_cast<char*>(m.data.data()),
            static_cast<std::streamsize>(m.data.size() * sizeof(double)));
    if (!in) throw ArtifactError("checkpoint truncated in tensor " + name);
    c.add(name, std::move(m));
  }
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot open for writing: " + path);
  write_checkpoint(c, out);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("missing checkpoint: " + path);
  return read_checkpoint(in);
}

Checkpoint checkpoint_params(const std::vector<Param*>& params) {
  Checkpoint c;
  for (const Param* p : params) c.add(p->name, p->value);
  return c;
}

void load_params(const Checkpoint& c, const std::vector<Param*>& params) {
  for (Param* p : params) {
    const Matrix* m = c.find(p->name);
    if (m == nullptr) throw ArtifactError("checkpoint lacks tensor: " + p->name);
    if (m->rows != p->value.rows || m->cols != p->value.cols)
      throw ArtifactError("checkpoint shape mismatch for " + p->name);
    p->value = *m;
  }
}

}  // namespace biclkt
