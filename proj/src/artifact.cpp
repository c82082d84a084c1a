#include "fcnv/artifact.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "fcnv/errors.hpp"

namespace fcnv {

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

constexpr char kMagic[4] = {'F', 'C', 'N', 'V'};
constexpr unsigned char kVersion = 1;

void append_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void append_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_f32(std::string& out, double v) {
  append_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

std::string encode_payload(const ArtifactData& a) {
  std::string payload;
  for (const auto& [name, t] : a.tensors) {
    if (name.empty() || name.size() > 0xffff)
      throw InternalError("artifact tensor name \"" + name + "\" has bad length");
    if (t.rank() < 1 || t.rank() > 255)
      throw InternalError("artifact tensor \"" + name + "\" has unsupported rank");
    append_u16(payload, static_cast<std::uint16_t>(name.size()));
    payload += name;
    payload.push_back(static_cast<char>(t.rank()));
    for (int i = 0; i < t.rank(); ++i) {
      if (t.dim(i) <= 0)
        throw InternalError("artifact tensor \"" + name + "\" has non-positive dim");
      append_u32(payload, static_cast<std::uint32_t>(t.dim(i)));
    }
    for (std::size_t i = 0; i < t.size(); ++i) append_f32(payload, t[i]);
  }
  return payload;
}

std::string encode_header(const ArtifactData& a, std::uint64_t payload_checksum) {
  std::map<std::string, std::string> kv = a.header;
  if (kv.count("payload.checksum"))
    throw InternalError("artifact header key \"payload.checksum\" is reserved");
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(payload_checksum));
  kv["payload.checksum"] = hex;
  std::string text;
  for (const auto& [k, v] : kv) {
    if (k.empty() || k.find_first_of("=\n") != std::string::npos ||
        v.find('\n') != std::string::npos)
      throw InternalError("artifact header entry \"" + k + "\" is not encodable");
    text += k;
    text.push_back('=');
    text += v;
    text.push_back('\n');
  }
  return text;
}

std::string encode_artifact(const ArtifactData& a) {
  const std::string payload = encode_payload(a);
  const std::string header = encode_header(a, fnv1a64(payload.data(), payload.size()));
  std::string out;
  out.reserve(9 + header.size() + payload.size() + 8);
  out.append(kMagic, 4);
  out.push_back(static_cast<char>(kVersion));
  append_u32(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  out += payload;
  std::uint64_t sum = fnv1a64(header.data(), header.size());
  sum = fnv1a64(payload.data(), payload.size(), sum);
  append_u64(out, sum);
  return out;
}

// Bounds-checked little-endian cursor over a loaded file.
struct Reader {
  const std::string& buf;
  const std::string& path;
  std::size_t pos = 0, end = 0;

  void need(std::size_t n) const {
    if (pos + n > end)
      throw ArtifactTruncatedError(path + ": truncated (needed " + std::to_string(n) +
                                   " more bytes)");
  }
  std::uint64_t u(int bytes) {
    need(static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += static_cast<std::size_t>(bytes);
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
};

}  // namespace

std::uint64_t artifact_size_bytes(const ArtifactData& a) {
  return encode_artifact(a).size();
}

void save_artifact(const std::string& path, const ArtifactData& a) {
  const std::string bytes = encode_artifact(a);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ArtifactError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ArtifactError("write failed for " + path);
}

ArtifactData load_artifact(const std::string& path) {
  std::string buf;
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArtifactError("cannot open artifact " + path);
    std::ostringstream tmp;
    tmp << in.rdbuf();
    buf = tmp.str();
  }
  if (buf.size() < 9) throw ArtifactTruncatedError(path + ": shorter than the fixed prefix");
  if (buf.compare(0, 4, kMagic, 4) != 0)
    throw ArtifactError(path + ": bad magic, not a model artifact");
  if (static_cast<unsigned char>(buf[4]) != kVersion)
    throw ArtifactVersionError(path + ": format version " +
                               std::to_string(static_cast<unsigned char>(buf[4])) +
                               ", expected " + std::to_string(kVersion));
  Reader r{buf, path, 5, buf.size()};
  const auto header_len = static_cast<std::size_t>(r.u(4));
  if (9 + header_len + 8 > buf.size())
    throw ArtifactTruncatedError(path + ": header length overruns the file");
  const std::string header_text = r.bytes(header_len);

  // Records occupy everything up to the trailing checksum.
  Reader body{buf, path, r.pos, buf.size() - 8};
  ArtifactData a;
  while (body.pos < body.end) {
    const auto name_len = static_cast<std::size_t>(body.u(2));
    std::string name = body.bytes(name_len);
    const int rank = static_cast<int>(body.u(1));
    if (rank < 1) throw ArtifactError(path + ": tensor \"" + name + "\" has rank 0");
    Shape shape;
    std::size_t numel = 1;
    for (int i = 0; i < rank; ++i) {
      const auto d = body.u(4);
      if (d == 0 || d > 0x7fffffffULL)
        throw ArtifactError(path + ": tensor \"" + name + "\" has bad dim");
      shape.push_back(static_cast<int>(d));
      numel *= static_cast<std::size_t>(d);
    }
    Tensor t = Tensor::zeros(shape);
    for (std::size_t i = 0; i < numel; ++i)
      t[i] = static_cast<double>(
          std::bit_cast<float>(static_cast<std::uint32_t>(body.u(4))));
    a.tensors.push_back({std::move(name), std::move(t)});
  }
  const std::string payload = buf.substr(r.pos, buf.size() - 8 - r.pos);

  Reader tail{buf, path, buf.size() - 8, buf.size()};
  const std::uint64_t stored = tail.u(8);
  std::uint64_t sum = fnv1a64(header_text.data(), header_text.size());
  sum = fnv1a64(payload.data(), payload.size(), sum);
  if (sum != stored)
    throw ArtifactChecksumError(path + ": checksum mismatch (file corrupt)");

  // Header lines.
  std::size_t start = 0;
  std::string payload_checksum;
  while (start < header_text.size()) {
    auto nl = header_text.find('\n', start);
    if (nl == std::string::npos)
      throw ArtifactError(path + ": unterminated header line");
    const std::string line = header_text.substr(start, nl - start);
    start = nl + 1;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ArtifactError(path + ": malformed header line \"" + line + "\"");
    const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    if (key == "payload.checksum") {
      payload_checksum = value;
      continue;
    }
    if (!a.header.emplace(key, value).second)
      throw ArtifactError(path + ": duplicate header key \"" + key + "\"");
  }
  if (payload_checksum.empty())
    throw ArtifactError(path + ": header lacks payload.checksum");
  char expected[17];
  std::snprintf(expected, sizeof expected, "%016llx",
                static_cast<unsigned long long>(fnv1a64(payload.data(), payload.size())));
  if (payload_checksum != expected)
    throw ArtifactChecksumError(path + ": payload checksum mismatch");
  return a;
}

// --- model-level wrappers ---

TaskKind AnyModel::task() const {
  if (nwp) return TaskKind::kNwp;
  if (intent_slot) return TaskKind::kIntentSlot;
  if (doc_class) return TaskKind::kDocClass;
  throw InternalError("AnyModel holds no model");
}

void AnyModel::visit_params(const ParamVisitor& f) {
  if (nwp)
    nwp->visit_params(f);
  else if (intent_slot)
    intent_slot->visit_params(f);
  else if (doc_class)
    doc_class->visit_params(f);
  else
    throw InternalError("AnyModel holds no model");
}

std::uint64_t AnyModel::param_count() {
  std::uint64_t n = 0;
  visit_params([&](const std::string&, Tensor& t) { n += t.size(); });
  return n;
}

std::map<std::string, std::string> AnyModel::config_header() const {
  std::map<std::string, std::string> kv;
  const char* tokenizer = nullptr;
  if (nwp) {
    kv = config_kv(nwp->config());
    tokenizer = "word";
  } else if (intent_slot) {
    kv = config_kv(intent_slot->config());
    tokenizer = "char";
  } else if (doc_class) {
    kv = config_kv(doc_class->config());
    tokenizer = "byte";
  } else {
    throw InternalError("AnyModel holds no model");
  }
  kv["tokenizer"] = tokenizer;
  return kv;
}

AnyModel build_model(Config& cfg, Rng& rng) {
  AnyModel m;
  switch (config_task(cfg)) {
    case TaskKind::kNwp:
      m.nwp = std::make_unique<NwpModel>(nwp_config_from(cfg), rng);
      break;
    case TaskKind::kIntentSlot:
      m.intent_slot = std::make_unique<IntentSlotModel>(intent_slot_config_from(cfg), rng);
      break;
    case TaskKind::kDocClass:
      m.doc_class = std::make_unique<DocClassModel>(doc_class_config_from(cfg), rng);
      break;
  }
  return m;
}

ArtifactData artifact_from_model(AnyModel& m) {
  ArtifactData a;
  a.header = m.config_header();
  m.visit_params([&](const std::string& name, Tensor& t) { a.tensors.push_back({name, t}); });
  return a;
}

void save_model(const std::string& path, AnyModel& m) {
  save_artifact(path, artifact_from_model(m));
}

AnyModel load_model(const std::string& path) {
  ArtifactData a = load_artifact(path);
  Config cfg = Config::from_map(a.header, path);
  const std::string tokenizer = cfg.get_string("tokenizer", "");
  Rng rng(0);  // weights are overwritten below
  AnyModel m;
  try {
    m = build_model(cfg, rng);
    cfg.finish();
  } catch (const ConfigError& e) {
    throw ArtifactError(path + ": bad embedded config: " + e.what());
  }
  const char* want = m.nwp ? "word" : m.intent_slot ? "char" : "byte";
  if (tokenizer != want)
    throw ArtifactError(path + ": tokenizer \"" + tokenizer + "\" does not match task");

  std::unordered_map<std::string, const NamedTensor*> by_name;
  for (const auto& nt : a.tensors)
    if (!by_name.emplace(nt.name, &nt).second)
      throw ArtifactError(path + ": duplicate tensor \"" + nt.name + "\"");
  std::size_t consumed = 0;
  m.visit_params([&](const std::string& name, Tensor& t) {
    auto it = by_name.find(name);
    if (it == by_name.end())
      throw ArtifactError(path + ": missing tensor \"" + name + "\"");
    const Tensor& src = it->second->value;
    if (!t.same_shape(src))
      throw ArtifactError(path + ": tensor \"" + name + "\" has shape " +
                          shape_str(src.shape()) + ", model expects " +
                          shape_str(t.shape()));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = src[i];
    ++consumed;
  });
  if (consumed != a.tensors.size())
    throw ArtifactError(path + ": artifact contains tensors the model does not use");
  return m;
}

}  // namespace fcnv
