#include "narrative/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "narrative/rng.hpp"

namespace narrative {

using json = nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

std::uint64_t bytes_hash(const std::string& bytes) { return fnv1a64(bytes); }

std::string hex64(std::uint64_t value) {
  std::ostringstream out;
  out << std::hex << value;
  return out.str();
}

std::string encode_floats(const Eigen::MatrixXf& m) {
  std::string bytes;
  bytes.reserve(static_cast<std::size_t>(m.size()) * 4);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const std::uint32_t u = std::bit_cast<std::uint32_t>(m(r, c));
      bytes.push_back(static_cast<char>(u & 0xFF));
      bytes.push_back(static_cast<char>((u >> 8) & 0xFF));
      bytes.push_back(static_cast<char>((u >> 16) & 0xFF));
      bytes.push_back(static_cast<char>((u >> 24) & 0xFF));
    }
  }
  return bytes;
}

Eigen::MatrixXf decode_floats(const std::string& bytes, Eigen::Index rows,
                              Eigen::Index cols, const std::string& name) {
  if (bytes.size() != static_cast<std::size_t>(rows * cols) * 4) {
    throw DataError("checkpoint weight \"" + name + "\" has wrong byte count");
  }
  Eigen::MatrixXf m(rows, cols);
  std::size_t at = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      std::uint32_t u = 0;
      u |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at++]));
      u |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at++])) << 8;
      u |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at++])) << 16;
      u |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at++])) << 24;
      m(r, c) = std::bit_cast<float>(u);
    }
  }
  return m;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

void save_checkpoint(const CnnModel& model, const Vocabulary& vocab,
                     const PosTagset& tagset, const TrainMeta& meta,
                     const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  {
    std::ofstream out(dir / "vocab.txt");
    if (!out) throw DataError("cannot write vocab.txt in " + dir.string());
    for (const std::string& token : vocab.tokens()) out << token << "\n";
  }
  {
    std::ofstream out(dir / "tagset.txt");
    if (!out) throw DataError("cannot write tagset.txt in " + dir.string());
    for (const std::string& tag : tagset.tags()) out << tag << "\n";
  }

  const CnnConfig& config = model.config();
  json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["config"] = {{"filter_widths", config.filter_widths},
                        {"filters_per_width", config.filters_per_width},
                        {"hidden_dim", config.hidden_dim},
                        {"num_classes", config.num_classes},
                        {"dropout", config.dropout},
                        {"embedding_dim", config.embedding_dim},
                        {"pos_dim", config.pos_dim},
                        {"use_pos", config.use_pos}};
  json label_order = json::array();
  for (ClauseType t : kClassifierLabelOrder) label_order.push_back(to_string(t));
  manifest["label_order"] = std::move(label_order);
  manifest["tagset_version"] = tagset.version();
  manifest["vocab_hash"] = hex64(vocab.content_hash());
  manifest["vocab_min_count"] = vocab.min_count();
  manifest["seed"] = meta.seed;
  manifest["split"] = {{"fractions", meta.fractions},
                       {"min_agreement", meta.min_agreement},
                       {"drop_not_story", meta.drop_not_story}};

  json params = json::array();
  auto refs = const_cast<CnnModel&>(model).params();
  for (const auto& ref : refs) {
    const std::string file = ref.name + ".bin";
    const std::string bytes = encode_floats(*ref.value);
    std::ofstream out(dir / file, std::ios::binary);
    if (!out) throw DataError("cannot write " + (dir / file).string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    params.push_back({{"name", ref.name},
                      {"rows", ref.value->rows()},
                      {"cols", ref.value->cols()},
                      {"file", file},
                      {"bytes", bytes.size()},
                      {"checksum", hex64(bytes_hash(bytes))}});
  }
  manifest["params"] = std::move(params);

  std::ofstream out(dir / "manifest.json");
  if (!out) throw DataError("cannot write manifest.json in " + dir.string());
  out << manifest.dump(2) << "\n";
}

LoadedCheckpoint load_checkpoint(
    const std::filesystem::path& dir,
    const std::optional<Vocabulary>& expected_vocab) {
  json manifest;
  try {
    manifest = json::parse(read_file(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw DataError("invalid checkpoint manifest: " + std::string(e.what()));
  }
  if (manifest.value("format_version", -1) != kFormatVersion) {
    throw DataError("unsupported checkpoint format version");
  }

  CnnConfig config;
  try {
    const json& cj = manifest.at("config");
    config.filter_widths = cj.at("filter_widths").get<std::vector<int>>();
    config.filters_per_width = cj.at("filters_per_width").get<int>();
    config.hidden_dim = cj.at("hidden_dim").get<int>();
    config.num_classes = cj.at("num_classes").get<int>();
    config.dropout = cj.at("dropout").get<double>();
    config.embedding_dim = cj.at("embedding_dim").get<int>();
    config.pos_dim = cj.at("pos_dim").get<int>();
    config.use_pos = cj.at("use_pos").get<bool>();
  } catch (const json::exception& e) {
    throw DataError("checkpoint manifest missing config field: " +
                    std::string(e.what()));
  }

  // the stored label order must match this build's contract
  if (manifest.contains("label_order")) {
    std::vector<std::string> stored =
        manifest["label_order"].get<std::vector<std::string>>();
    std::vector<std::string> expected;
    for (ClauseType t : kClassifierLabelOrder) expected.push_back(to_string(t));
    if (stored != expected) {
      throw DataError("checkpoint label order does not match this build");
    }
  }

  // vocabulary, hash-checked against the manifest and any supplied vocab
  std::vector<std::string> tokens;
  {
    std::ifstream in(dir / "vocab.txt");
    if (!in) throw DataError("missing vocab.txt in " + dir.string());
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) tokens.push_back(line);
    }
  }
  Vocabulary vocab =
      Vocabulary::from_tokens(std::move(tokens), manifest.value("vocab_min_count", 2));
  const std::string stored_hash = manifest.value("vocab_hash", "");
  if (hex64(vocab.content_hash()) != stored_hash) {
    throw DataError("checkpoint vocab.txt does not match manifest vocab hash");
  }
  if (expected_vocab &&
      expected_vocab->content_hash() != vocab.content_hash()) {
    throw DataError(
        "supplied vocabulary does not match the checkpoint vocab hash; "
        "refusing to load");
  }

  PosTagset tagset = PosTagset::from_file(dir / "tagset.txt");

  TrainMeta meta;
  meta.seed = manifest.value("seed", 0ull);
  if (manifest.contains("split")) {
    const json& sj = manifest["split"];
    auto f = sj.value("fractions", std::vector<double>{0.86, 0.07, 0.07});
    if (f.size() == 3) meta.fractions = {f[0], f[1], f[2]};
    meta.min_agreement = sj.value("min_agreement", 2);
    meta.drop_not_story = sj.value("drop_not_story", true);
  }

  // weights
  std::map<std::string, Eigen::MatrixXf> weights;
  for (const json& pj : manifest.at("params")) {
    const std::string name = pj.at("name").get<std::string>();
    const std::string file = pj.at("file").get<std::string>();
    const auto rows = pj.at("rows").get<Eigen::Index>();
    const auto cols = pj.at("cols").get<Eigen::Index>();
    const std::string bytes = read_file(dir / file);
    if (bytes.size() != pj.at("bytes").get<std::size_t>() ||
        hex64(bytes_hash(bytes)) != pj.at("checksum").get<std::string>()) {
      throw DataError("checkpoint weight file \"" + file +
                      "\" failed its integrity check");
    }
    weights.emplace(name, decode_floats(bytes, rows, cols, name));
  }

  auto take = [&](const std::string& name) {
    auto it = weights.find(name);
    if (it == weights.end()) {
      throw DataError("checkpoint is missing parameter \"" + name + "\"");
    }
    return it->second;
  };

  Eigen::MatrixXf embedding = take("embedding");
  if (embedding.rows() != static_cast<Eigen::Index>(vocab.size())) {
    throw DataError("embedding rows do not match the checkpoint vocabulary");
  }
  CnnModel model(config, std::move(embedding), /*init_seed=*/0);
  for (auto& ref : model.params()) {
    if (ref.name == "embedding") continue;
    Eigen::MatrixXf value = take(ref.name);
    if (value.rows() != ref.value->rows() || value.cols() != ref.value->cols()) {
      throw DataError("checkpoint parameter \"" + ref.name +
                      "\" has unexpected shape");
    }
    *ref.value = std::move(value);
  }
  return LoadedCheckpoint{std::move(model), std::move(vocab), std::move(tagset),
                          meta};
}

}  // namespace narrative
