#include "linext/core/checkpoint.hpp"

#include <cstring>

#include "linext/core/error.hpp"
#include "linext/core/file_util.hpp"

namespace linext {

namespace {

class Reader {
public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T read() {
    need(sizeof(T));
    T v = load_le<T>(bytes_.data() + pos_);
    pos_ += sizeof(T);
    return v;
  }

  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw TruncatedError("checkpoint truncated at byte " + std::to_string(pos_));
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const TensorTable& params, const RunConfig& cfg) {
  std::string out(kCheckpointMagic, 4);
  append_le<std::uint32_t>(out, kCheckpointVersion);
  const std::string cfg_text = nlohmann::json(cfg).dump();
  append_le<std::uint32_t>(out, static_cast<std::uint32_t>(cfg_text.size()));
  out += cfg_text;
  append_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, t] : params) {
    if (name.empty()) throw ValidationError("checkpoint entry with empty name");
    append_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    append_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) append_le<std::uint64_t>(out, d);
    for (double v : t.data()) append_le<double>(out, v);
  }
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  if (bytes.size() < 4) throw TruncatedError("checkpoint shorter than its magic");
  if (std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) throw BadMagicError("bad checkpoint magic");
  Reader r(bytes.substr(4));
  const auto version = r.read<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw VersionMismatchError("checkpoint version " + std::to_string(version) + ", expected " +
                               std::to_string(kCheckpointVersion));
  }
  Checkpoint ck;
  const auto cfg_len = r.read<std::uint32_t>();
  const auto cfg_text = r.take(cfg_len);
  try {
    ck.config = nlohmann::json::parse(cfg_text).get<RunConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint config block is not valid JSON: ") + e.what());
  }
  const auto count = r.read<std::uint32_t>();
  for (std::uint32_t e = 0; e < count; ++e) {
    const auto name_len = r.read<std::uint32_t>();
    std::string name(r.take(name_len));
    const auto rank = r.read<std::uint32_t>();
    if (rank == 0 || rank > 8) throw FormatError("checkpoint entry " + name + " has invalid rank");
    std::vector<std::size_t> shape(rank);
    std::size_t numel = 1;
    for (auto& d : shape) {
      d = static_cast<std::size_t>(r.read<std::uint64_t>());
      if (d == 0 || d > (std::size_t{1} << 40) / numel) {
        throw FormatError("checkpoint entry " + name + " has invalid shape");
      }
      numel *= d;
    }
    const auto payload = r.take(numel * sizeof(double));
    std::vector<double> data(numel);
    for (std::size_t i = 0; i < numel; ++i) data[i] = load_le<double>(payload.data() + i * sizeof(double));
    if (!ck.params.emplace(name, Tensor(std::move(shape), std::move(data))).second) {
      throw FormatError("duplicate checkpoint entry " + name);
    }
  }
  if (!r.done()) throw FormatError("trailing bytes after checkpoint entries");
  return ck;
}

void save_checkpoint(const TensorTable& params, const RunConfig& cfg, const std::string& path) {
  write_file_atomic(path, encode_checkpoint(params, cfg));
}

Checkpoint load_checkpoint(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  return decode_checkpoint(std::string_view(bytes.data(), bytes.size()));
}

std::size_t parameter_count(const TensorTable& params) {
  std::size_t n = 0;
  for (const auto& [_, t] : params) n += t.size();
  return n;
}

}  // namespace linext
