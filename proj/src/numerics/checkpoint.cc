#include "relparse/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "relparse/errors.h"

namespace relparse {
namespace {

constexpr char kMagic[8] = {'R', 'E', 'L', 'P', 'C', 'K', 'P', 'T'};

template <typename T>
void put_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::uint64_t bits = 0;
  if constexpr (std::is_same_v<T, double>) {
    bits = std::bit_cast<std::uint64_t>(value);
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in, const std::string& path) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw InputError("truncated checkpoint: " + path);
  }
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<double>(bits);
  } else {
    return static_cast<T>(bits);
  }
}

}  // namespace

void write_tensor_file(const std::string& path, const std::map<std::string, Tensor>& entries) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, entries.size());
  for (const auto& [name, t] : entries) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) put_le<std::uint64_t>(out, d);
    for (double v : t.data()) put_le<double>(out, v);
  }
  if (!out) throw InputError("write failed: " + path);
}

std::map<std::string, Tensor> read_tensor_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint: " + path);
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw InputError("not a checkpoint file: " + path);
  }
  const auto version = get_le<std::uint32_t>(in, path);
  if (version != kCheckpointVersion) {
    throw InputError("unsupported checkpoint version " + std::to_string(version) + ": " + path);
  }
  const auto count = get_le<std::uint64_t>(in, path);
  std::map<std::string, Tensor> entries;
  for (std::uint64_t e = 0; e < count; ++e) {
    const auto name_len = get_le<std::uint32_t>(in, path);
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) throw InputError("truncated checkpoint: " + path);
    const auto rank = get_le<std::uint32_t>(in, path);
    Shape shape(rank);
    for (auto& d : shape) d = get_le<std::uint64_t>(in, path);
    std::vector<double> values(shape_size(shape));
    for (double& v : values) v = get_le<double>(in, path);
    entries.emplace(std::move(name), Tensor::from(std::move(shape), std::move(values)));
  }
  return entries;
}

void save_checkpoint(const std::string& path, const ParamStore& params) {
  write_tensor_file(path, params.all());
}

void load_checkpoint(const std::string& path, ParamStore& params) {
  const auto entries = read_tensor_file(path);
  for (const auto& [name, param] : params.all()) {
    auto it = entries.find(name);
    if (it == entries.end()) throw InputError("checkpoint " + path + " lacks parameter " + name);
    if (it->second.shape() != param.shape()) {
      throw InputError("checkpoint " + path + ": shape mismatch for " + name + " " +
                       shape_string(it->second.shape()) + " vs " + shape_string(param.shape()));
    }
    Tensor p = param;
    std::copy(it->second.data().begin(), it->second.data().end(), p.mutable_data().begin());
  }
}

void save_adam_state(const std::string& path, const AdamState& state) {
  std::map<std::string, Tensor> entries;
  for (const auto& [name, m] : state.first_moment) entries.emplace("m/" + name, Tensor::vector(m));
  for (const auto& [name, v] : state.second_moment) entries.emplace("v/" + name, Tensor::vector(v));
  entries.emplace("adam.step", Tensor::scalar(static_cast<double>(state.step_count)));
  entries.emplace("adam.beta1", Tensor::scalar(state.beta1));
  entries.emplace("adam.beta2", Tensor::scalar(state.beta2));
  entries.emplace("adam.epsilon", Tensor::scalar(state.epsilon));
  write_tensor_file(path, entries);
}

AdamState load_adam_state(const std::string& path) {
  AdamState state;
  for (const auto& [name, t] : read_tensor_file(path)) {
    if (name.rfind("m/", 0) == 0) {
      state.first_moment[name.substr(2)].assign(t.data().begin(), t.data().end());
    } else if (name.rfind("v/", 0) == 0) {
      state.second_moment[name.substr(2)].assign(t.data().begin(), t.data().end());
    } else if (name == "adam.step") {
      state.step_count = static_cast<std::int64_t>(t.item());
    } else if (name == "adam.beta1") {
      state.beta1 = t.item();
    } else if (name == "adam.beta2") {
      state.beta2 = t.item();
    } else if (name == "adam.epsilon") {
      state.epsilon = t.item();
    }
  }
  return state;
}

}  // namespace relparse
