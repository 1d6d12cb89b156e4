// Binary checkpoint files.
//
// Layout (all integers and floats little-endian):
//   magic    8 bytes  "RELPCKPT"
//   version  u32      kCheckpointVersion
//   count    u64      number of entries
//   entry*   u32 name length, name bytes, u32 rank, u64 dims[rank],
//            f64 payload[product(dims)]
//
// Optimizer state uses the same layout in a sibling file with an ".opt"
// suffix, with entries "m/<param>", "v/<param>" and scalar entries
// "adam.step", "adam.beta1", "adam.beta2", "adam.epsilon".

#ifndef RELPARSE_CHECKPOINT_H_
#define RELPARSE_CHECKPOINT_H_

#include <cstdint>
#include <map>
#include <string>

#include "relparse/adam.h"
#include "relparse/param_store.h"

namespace relparse {

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_tensor_file(const std::string& path, const std::map<std::string, Tensor>& entries);
std::map<std::string, Tensor> read_tensor_file(const std::string& path);

void save_checkpoint(const std::string& path, const ParamStore& params);
// Overwrites values of already-registered parameters; every parameter must be
// present in the file with a matching shape.
void load_checkpoint(const std::string& path, ParamStore& params);

void save_adam_state(const std::string& path, const AdamState& state);
AdamState load_adam_state(const std::string& path);

}  // namespace relparse

#endif  // RELPARSE_CHECKPOINT_H_
