#include "proofmatch/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "proofmatch/error.hpp"

namespace proofmatch {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace {

constexpr std::array<char, 8> kMagic = {'P', 'M', 'C', 'K', 'P', 'T', '\0', '\0'};

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw DataError("cannot open " + path.string() + " for writing");
  }
  template <typename T>
  void put(T value) {
    out_.write(reinterpret_cast<const char*>(&value), sizeof value);
  }
  void put_string(const std::string& s) {
    put(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void put_bytes(const void* data, std::size_t size) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  }
  void finish() {
    out_.flush();
    if (!out_) throw DataError("failed writing " + path_.string());
  }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw DataError("cannot open checkpoint " + path.string());
  }
  template <typename T>
  T get() {
    T value{};
    read(&value, sizeof value);
    return value;
  }
  std::string get_string() {
    const auto size = get<std::uint32_t>();
    std::string s(size, '\0');
    read(s.data(), size);
    return s;
  }
  void read(void* data, std::size_t size) {
    if (!in_.read(static_cast<char*>(data), static_cast<std::streamsize>(size))) {
      throw DataError("truncated checkpoint");
    }
  }

 private:
  std::ifstream in_;
};

}  // namespace

void save_checkpoint(const EncoderModel& model, const Vocabulary& vocabulary,
                     const std::filesystem::path& path) {
  const auto& c = model.config();
  if (vocabulary.size() != c.vocab_size) {
    throw DataError("vocabulary size differs from the model's embedding table");
  }
  Writer w(path);
  w.put_bytes(kMagic.data(), kMagic.size());
  w.put(kCheckpointVersion);
  for (const std::uint64_t v : {c.vocab_size, c.embed_dim, c.layers, c.model_dim, c.heads,
                                c.key_dim, c.ffn_dim, c.max_len}) {
    w.put(v);
  }
  w.put(c.dropout);
  w.put(static_cast<std::uint8_t>(c.positional ? 1 : 0));

  w.put(static_cast<std::uint64_t>(vocabulary.size()));
  for (const auto& entry : vocabulary.entries()) w.put_string(entry);

  w.put(static_cast<std::uint64_t>(model.parameters().size()));
  std::vector<float> buffer;
  for (const auto& p : model.parameters()) {
    w.put_string(p.name);
    w.put(static_cast<std::uint64_t>(p.value.rows()));
    w.put(static_cast<std::uint64_t>(p.value.cols()));
    buffer.resize(static_cast<std::size_t>(p.value.size()));
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      buffer[static_cast<std::size_t>(i)] = static_cast<float>(p.value.data()[i]);
    }
    w.put_bytes(buffer.data(), buffer.size() * sizeof(float));
  }
  w.finish();
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  Reader r(path);
  std::array<char, 8> magic{};
  r.read(magic.data(), magic.size());
  if (magic != kMagic) throw DataError(path.string() + " is not a checkpoint");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }

  EncoderConfig c;
  for (std::size_t* field : {&c.vocab_size, &c.embed_dim, &c.layers, &c.model_dim, &c.heads,
                             &c.key_dim, &c.ffn_dim, &c.max_len}) {
    *field = static_cast<std::size_t>(r.get<std::uint64_t>());
  }
  c.dropout = r.get<double>();
  c.positional = r.get<std::uint8_t>() != 0;

  const auto vocab_entries = r.get<std::uint64_t>();
  if (vocab_entries != c.vocab_size || vocab_entries < 2) {
    throw DataError("checkpoint vocabulary size disagrees with its config");
  }
  std::vector<std::string> tokens;
  tokens.reserve(vocab_entries - 2);
  for (std::uint64_t i = 0; i < vocab_entries; ++i) {
    auto entry = r.get_string();
    if (i >= 2) tokens.push_back(std::move(entry));
  }

  Checkpoint out{EncoderModel(c), Vocabulary(tokens)};
  auto& params = out.model.parameters();
  const auto tensors = r.get<std::uint64_t>();
  if (tensors != params.size()) throw DataError("checkpoint tensor count disagrees with its config");
  std::vector<float> buffer;
  for (auto& p : params) {
    const auto name = r.get_string();
    const auto rows = r.get<std::uint64_t>();
    const auto cols = r.get<std::uint64_t>();
    if (name != p.name || rows != static_cast<std::uint64_t>(p.value.rows()) ||
        cols != static_cast<std::uint64_t>(p.value.cols())) {
      throw DataError("checkpoint tensor " + name + " does not match the config layout");
    }
    buffer.resize(rows * cols);
    r.read(buffer.data(), buffer.size() * sizeof(float));
    for (std::size_t i = 0; i < buffer.size(); ++i) p.value.data()[i] = buffer[i];
  }
  return out;
}

}  // namespace proofmatch
