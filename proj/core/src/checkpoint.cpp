// Copyright 2026 The Seqvision Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "seqvision/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json_io.hpp"
#include "seqvision/errors.hpp"

namespace seqvision {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kMagicSize = 8;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}

void put_f32(std::string& out, const float* data, std::size_t n) {
  const std::size_t start = out.size();
  out.resize(start + 4 * n);
  char* dst = out.data() + start;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(data[i]);
    for (int b = 0; b < 4; ++b) dst[4 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
}

void get_f32(const unsigned char* src, float* data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) data[i] = std::bit_cast<float>(get_u32(src + 4 * i));
}

struct Parsed {
  json header;
  std::string payload;
};

Parsed parse_container(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointErrorKind::kIo, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < kMagicSize) {
    if (bytes.compare(0, bytes.size(), kCheckpointMagic, bytes.size()) == 0) {
      throw CheckpointError(CheckpointErrorKind::kTruncated, path.string() + ": truncated magic");
    }
    throw CheckpointError(CheckpointErrorKind::kBadMagic, path.string() + ": not a checkpoint");
  }
  if (std::memcmp(bytes.data(), kCheckpointMagic, kMagicSize) != 0) {
    throw CheckpointError(CheckpointErrorKind::kBadMagic, path.string() + ": bad magic");
  }
  if (bytes.size() < kMagicSize + 4) {
    throw CheckpointError(CheckpointErrorKind::kTruncated, path.string() + ": truncated header");
  }
  const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t header_len = get_u32(raw + kMagicSize);
  const std::size_t body = kMagicSize + 4;
  if (bytes.size() - body < header_len) {
    throw CheckpointError(CheckpointErrorKind::kTruncated, path.string() + ": truncated header");
  }
  Parsed p;
  try {
    p.header = json::parse(bytes.substr(body, header_len));
  } catch (const json::exception& e) {
    throw CheckpointError(CheckpointErrorKind::kMalformed,
                          path.string() + ": bad header: " + e.what());
  }
  p.payload = bytes.substr(body + header_len);
  return p;
}

void check_span(const json& entry, std::size_t count, std::size_t payload_size,
                const std::string& what) {
  const std::size_t offset = entry.at("offset").get<std::size_t>();
  if (offset % 4 != 0 || offset > payload_size || payload_size - offset < 4 * count) {
    throw CheckpointError(CheckpointErrorKind::kTruncated, what + " extends past the payload");
  }
}

}  // namespace

void save_checkpoint(const fs::path& path, const Codecs& codecs, const Transformer<float>* model,
                     const std::map<std::string, std::string>& meta) {
  std::string payload;
  json header;
  header["format"] = 1;
  header["vocab"] = json_io::layout_to_json(codecs.layout);
  header["palette_classes"] = codecs.palette.class_count();
  const PatchCodebook& cb = codecs.codebook;
  header["codebook"] = {{"patch_size", cb.patch_size()}, {"size", cb.size()}, {"offset", 0}};
  put_f32(payload, cb.entries().data(), cb.entries().size());
  json merges = json::array();
  for (const auto& [a, b] : codecs.bpe.merges()) merges.push_back({a, b});
  header["bpe"] = {{"merges", merges}};
  header["meta"] = meta;
  if (model != nullptr) {
    header["model"] = json_io::model_to_json(model->config());
    header["frozen"] = {
        {"visual", model->frozen(ParamGroup::kVisualEncoder)},
        {"instruction", model->frozen(ParamGroup::kInstructionEncoder)}};
    json tensors = json::array();
    for (const auto& p : model->parameters()) {
      tensors.push_back({{"name", p.name},
                         {"shape", {p.value.rows(), p.value.cols()}},
                         {"offset", payload.size()}});
      put_f32(payload, p.value.data(), static_cast<std::size_t>(p.value.size()));
    }
    header["tensors"] = tensors;
  } else {
    header["model"] = nullptr;
    header["tensors"] = json::array();
  }
  header["payload_bytes"] = payload.size();

  const std::string text = header.dump();
  std::string out(kCheckpointMagic, kMagicSize);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  out += payload;

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw CheckpointError(CheckpointErrorKind::kIo, "cannot write " + tmp.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw CheckpointError(CheckpointErrorKind::kIo, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

Checkpoint load_checkpoint(const fs::path& path, const VocabLayout* expected) {
  Parsed p = parse_container(path);
  const json& h = p.header;
  const auto* raw = reinterpret_cast<const unsigned char*>(p.payload.data());
  Checkpoint ck;
  try {
    if (h.at("format").get<int>() != 1) {
      throw CheckpointError(CheckpointErrorKind::kMalformed, "unsupported checkpoint format");
    }
    if (h.at("payload_bytes").get<std::size_t>() > p.payload.size()) {
      throw CheckpointError(CheckpointErrorKind::kTruncated,
                            path.string() + ": payload truncated");
    }
    ck.codecs.layout = json_io::layout_from_json(h.at("vocab"), kDefaultMaxVocab, "vocab");
    if (expected != nullptr && !(*expected == ck.codecs.layout)) {
      throw CheckpointError(CheckpointErrorKind::kLayoutMismatch,
                            path.string() + ": stored layout " +
                                json_io::layout_to_json(ck.codecs.layout).dump() +
                                " differs from configured " +
                                json_io::layout_to_json(*expected).dump());
    }
    ck.codecs.palette = palette_for_classes(h.at("palette_classes").get<int>());

    const json& cbj = h.at("codebook");
    const int size = cbj.at("size").get<int>();
    const int patch = cbj.at("patch_size").get<int>();
    if (size > 0) {
      const std::size_t n = static_cast<std::size_t>(size) * 3 * patch * patch;
      check_span(cbj, n, p.payload.size(), "codebook");
      std::vector<float> entries(n);
      get_f32(raw + cbj.at("offset").get<std::size_t>(), entries.data(), n);
      ck.codecs.codebook = PatchCodebook(patch, size, std::move(entries));
    }
    std::vector<std::pair<int, int>> merges;
    for (const auto& m : h.at("bpe").at("merges")) {
      merges.emplace_back(m.at(0).get<int>(), m.at(1).get<int>());
    }
    ck.codecs.bpe = BpeModel(std::move(merges));
    const json meta = h.value("meta", json::object());
    for (const auto& [k, v] : meta.items()) {
      ck.meta[k] = v.get<std::string>();
    }

    if (!h.at("model").is_null()) {
      ModelConfig cfg;
      cfg.vocab = ck.codecs.layout;
      json_io::model_from_json(h.at("model"), cfg, "model");
      cfg.validate();
      Transformer<float> model(cfg, 0);
      const json& tensors = h.at("tensors");
      if (tensors.size() != model.parameters().size()) {
        throw CheckpointError(CheckpointErrorKind::kLayoutMismatch,
                              path.string() + ": tensor count does not match the model");
      }
      for (const auto& t : tensors) {
        const std::string name = t.at("name").get<std::string>();
        Parameter<float>* param = model.parameters().find(name);
        if (param == nullptr) {
          throw CheckpointError(CheckpointErrorKind::kLayoutMismatch,
                                path.string() + ": unknown tensor " + name);
        }
        const auto rows = t.at("shape").at(0).get<Eigen::Index>();
        const auto cols = t.at("shape").at(1).get<Eigen::Index>();
        if (rows != param->value.rows() || cols != param->value.cols()) {
          throw CheckpointError(CheckpointErrorKind::kLayoutMismatch,
                                path.string() + ": shape mismatch for " + name);
        }
        const std::size_t n = static_cast<std::size_t>(rows * cols);
        check_span(t, n, p.payload.size(), name);
        get_f32(raw + t.at("offset").get<std::size_t>(), param->value.data(), n);
      }
      const json fr = h.value("frozen", json::object());
      model.set_frozen(ParamGroup::kVisualEncoder, fr.value("visual", false));
      model.set_frozen(ParamGroup::kInstructionEncoder, fr.value("instruction", false));
      ck.model.emplace(std::move(model));
    }
  } catch (const json::exception& e) {
    throw CheckpointError(CheckpointErrorKind::kMalformed,
                          path.string() + ": bad header: " + e.what());
  } catch (const ConfigError& e) {
    throw CheckpointError(CheckpointErrorKind::kMalformed, path.string() + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw CheckpointError(CheckpointErrorKind::kMalformed, path.string() + ": " + e.what());
  }
  return ck;
}

std::string describe_checkpoint(const fs::path& path) {
  Parsed p = parse_container(path);
  json h = p.header;
  h["payload_actual_bytes"] = p.payload.size();
  if (h.contains("bpe")) {
    const std::size_t n = h["bpe"]["merges"].size();
    h["bpe"] = {{"merges", n}, {"vocab_size", kByteAlphabet + n}};
  }
  std::size_t scalars = 0;
  for (const auto& t : h.value("tensors", json::array())) {
    scalars += t["shape"][0].get<std::size_t>() * t["shape"][1].get<std::size_t>();
  }
  h["parameter_count"] = scalars;
  return h.dump(2);
}

}  // namespace seqvision
