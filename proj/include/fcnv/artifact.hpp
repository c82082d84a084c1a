#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fcnv/config.hpp"
#include "fcnv/task_models.hpp"

namespace fcnv {

// On-disk layout (all integers little-endian):
//   magic "FCNV" | version byte (1) | u32 header length | UTF-8 header |
//   tensor records | u64 FNV-1a checksum over header bytes + record bytes
// Header: sorted "key=value\n" lines — the model's config keys plus
// tokenizer=<word|char|byte> and payload.checksum=<hex FNV-1a of records>.
// Record: u16 name length | name | u8 rank | rank x u32 dims |
//         numel x f32 raw values.
// Weights are stored at 32-bit precision (the deployed footprint); internal
// compute stays 64-bit.

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = kFnvOffset);

struct NamedTensor {
  std::string name;
  Tensor value;
};

struct ArtifactData {
  std::map<std::string, std::string> header;  // without payload.checksum
  std::vector<NamedTensor> tensors;           // record order preserved
};

void save_artifact(const std::string& path, const ArtifactData& a);
ArtifactData load_artifact(const std::string& path);

// Exact size save_artifact will write:
//   9 + header_len + sum(2 + name_len + 1 + 4*rank + 4*numel) + 8,
// header_len counting the payload.checksum line added at save time.
std::uint64_t artifact_size_bytes(const ArtifactData& a);

// --- model-level wrappers ---

// Exactly one pointer is set.
struct AnyModel {
  std::unique_ptr<NwpModel> nwp;
  std::unique_ptr<IntentSlotModel> intent_slot;
  std::unique_ptr<DocClassModel> doc_class;

  TaskKind task() const;
  void visit_params(const ParamVisitor& f);
  std::uint64_t param_count();
  std::map<std::string, std::string> config_header() const;  // incl. tokenizer
};

// Reads task + encoder keys from cfg and initializes fresh weights.
AnyModel build_model(Config& cfg, Rng& rng);

ArtifactData artifact_from_model(AnyModel& m);
void save_model(const std::string& path, AnyModel& m);
// Rebuilds the model from the embedded header, then overwrites every
// parameter from the tensor records (matched by name, shapes checked).
AnyModel load_model(const std::string& path);

}  // namespace fcnv
