#include "wsnet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

namespace wsnet {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'W', 'S', 'N', 'E', 'T', 'C', 'K', 'P'};

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw Error("checkpoint: truncated file");
  return v;
}

void put_string(std::ostream& os, const std::string& s) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string take_string(std::istream& is) {
  const auto len = take<std::uint32_t>(is);
  if (len > (1u << 20)) throw Error("checkpoint: implausible string length");
  std::string s(len, '\0');
  if (!is.read(s.data(), len)) throw Error("checkpoint: truncated file");
  return s;
}

void put_tensor(std::ostream& os, const std::string& name, const Matrix& m) {
  put_string(os, name);
  put<std::int64_t>(os, m.rows());
  put<std::int64_t>(os, m.cols());
  os.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
}

}  // namespace

void write_checkpoint(std::ostream& os, const Checkpoint& ckpt) {
  const auto& names = EncoderParams::names();
  const auto tensors = ckpt.params.tensors();
  const bool has_moments = ckpt.optimizer.first_moment.size() == tensors.size();
  os.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(os, kCheckpointVersion);
  put<std::int64_t>(os, ckpt.epoch);
  put_string(os, ckpt.config_hash);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(tensors.size() * (has_moments ? 3 : 1)));
  for (std::size_t k = 0; k < tensors.size(); ++k) put_tensor(os, names[k], *tensors[k]);
  if (has_moments) {
    for (std::size_t k = 0; k < tensors.size(); ++k) put_tensor(os, "m/" + names[k], ckpt.optimizer.first_moment[k]);
    for (std::size_t k = 0; k < tensors.size(); ++k) put_tensor(os, "v/" + names[k], ckpt.optimizer.second_moment[k]);
  }
  const AdamConfig& c = ckpt.optimizer.config;
  for (double v : {c.lr, c.beta1, c.beta2, c.eps, c.weight_decay}) put<double>(os, v);
  put<std::int64_t>(os, ckpt.optimizer.step);
  if (!os) throw Error("checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& is) {
  char magic[8];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw Error("checkpoint: bad magic");
  }
  const auto version = take<std::uint32_t>(is);
  if (version != kCheckpointVersion) throw Error("checkpoint: unsupported version " + std::to_string(version));
  Checkpoint ckpt;
  ckpt.epoch = take<std::int64_t>(is);
  ckpt.config_hash = take_string(is);
  const auto count = take<std::uint32_t>(is);
  std::map<std::string, Matrix> tensors;
  for (std::uint32_t k = 0; k < count; ++k) {
    std::string name = take_string(is);
    const auto rows = take<std::int64_t>(is);
    const auto cols = take<std::int64_t>(is);
    if (rows < 0 || cols < 0 || rows * cols > (std::int64_t{1} << 32)) throw Error("checkpoint: bad tensor shape");
    Matrix m(rows, cols);
    if (!is.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)))) {
      throw Error("checkpoint: truncated tensor " + name);
    }
    tensors.emplace(std::move(name), std::move(m));
  }
  const auto& names = EncoderParams::names();
  auto targets = ckpt.params.tensors();
  for (std::size_t k = 0; k < names.size(); ++k) {
    auto it = tensors.find(names[k]);
    if (it == tensors.end()) throw Error("checkpoint: missing tensor " + names[k]);
    *targets[k] = it->second;
  }
  if (tensors.contains("m/" + names[0])) {
    for (const auto& name : names) {
      auto m = tensors.find("m/" + name);
      auto v = tensors.find("v/" + name);
      if (m == tensors.end() || v == tensors.end()) throw Error("checkpoint: incomplete optimizer state");
      ckpt.optimizer.first_moment.push_back(m->second);
      ckpt.optimizer.second_moment.push_back(v->second);
    }
  }
  AdamConfig& c = ckpt.optimizer.config;
  c.lr = take<double>(is);
  c.beta1 = take<double>(is);
  c.beta2 = take<double>(is);
  c.eps = take<double>(is);
  c.weight_decay = take<double>(is);
  ckpt.optimizer.step = take<std::int64_t>(is);
  ckpt.params.validate();
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("checkpoint: cannot open " + path.string() + " for writing");
  write_checkpoint(os, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("checkpoint: cannot open " + path.string());
  return read_checkpoint(is);
}

}  // namespace wsnet
