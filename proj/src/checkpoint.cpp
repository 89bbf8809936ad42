#include "sinreq/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <limits>

#include "sinreq/errors.hpp"

namespace sinreq {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void put_f64(std::string& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n, const char* field) {
    if (bytes_.size() - pos_ < n) throw ParseError(field, "truncated checkpoint");
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::uint64_t little(std::size_t n, const char* field) {
    const auto s = take(n, field);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[i])) << (8 * i);
    return v;
  }

  std::uint32_t u32(const char* field) { return static_cast<std::uint32_t>(little(4, field)); }
  std::uint8_t u8(const char* field) { return static_cast<std::uint8_t>(little(1, field)); }
  double f64(const char* field) { return std::bit_cast<double>(little(8, field)); }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(std::span<const NamedTensor> tensors) {
  std::string out(kCheckpointMagic);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    out.push_back(static_cast<char>(kDtypeF64));
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) {
      if (d > std::numeric_limits<std::uint32_t>::max()) throw DimensionError("dimension too large for checkpoint");
      put_u32(out, static_cast<std::uint32_t>(d));
    }
    for (double v : t.data()) put_f64(out, v);
  }
  return out;
}

std::vector<NamedTensor> decode_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(kCheckpointMagic.size(), "magic") != kCheckpointMagic) throw ParseError("magic", "not a checkpoint");
  if (const auto v = r.u32("version"); v != kCheckpointVersion) {
    throw ParseError("version", "unsupported version " + std::to_string(v));
  }
  const std::uint32_t count = r.u32("count");
  std::vector<NamedTensor> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor nt;
    const std::uint32_t len = r.u32("name_length");
    nt.name = std::string(r.take(len, "name"));
    if (const auto tag = r.u8("dtype"); tag != kDtypeF64) {
      throw ParseError("dtype", "unsupported dtype tag " + std::to_string(tag));
    }
    const std::uint32_t rank = r.u32("rank");
    if (rank == 0) throw ParseError("rank", "tensor rank must be positive");
    Shape shape;
    std::uint64_t n = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      const std::uint32_t dim = r.u32("dims");
      if (dim == 0) throw ParseError("dims", "zero dimension");
      shape.push_back(dim);
      n *= dim;
      if (n > bytes.size()) throw ParseError("data", "truncated checkpoint");
    }
    std::vector<double> data(n);
    for (auto& v : data) v = r.f64("data");
    nt.tensor = Tensor(std::move(shape), std::move(data));
    out.push_back(std::move(nt));
  }
  if (!r.done()) throw ParseError("trailer", "unexpected bytes after last record");
  return out;
}

std::vector<NamedTensor> checkpoint_tensors(const Model& m) {
  std::vector<NamedTensor> out;
  for (const auto& p : m.parameters()) {
    out.push_back({p.name + ".weight", p.weights});
    out.push_back({p.name + ".bias", p.bias});
  }
  return out;
}

void save_checkpoint(const Model& m, const std::filesystem::path& path) {
  write_file(path, encode_checkpoint(checkpoint_tensors(m)));
}

void load_checkpoint(Model& m, const std::filesystem::path& path) {
  const auto tensors = decode_checkpoint(read_file(path));
  const auto expected = checkpoint_tensors(m);
  if (tensors.size() != expected.size()) {
    throw ConfigError("checkpoint has " + std::to_string(tensors.size()) + " tensors, model needs " +
                      std::to_string(expected.size()));
  }
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (tensors[i].name != expected[i].name || tensors[i].tensor.shape() != expected[i].tensor.shape()) {
      throw ConfigError("checkpoint tensor '" + tensors[i].name + "' " + shape_string(tensors[i].tensor.shape()) +
                        " does not match model tensor '" + expected[i].name + "' " +
                        shape_string(expected[i].tensor.shape()));
    }
  }
  for (std::size_t i = 0; i < m.parameters().size(); ++i) {
    m.parameters()[i].weights = tensors[2 * i].tensor;
    m.parameters()[i].bias = tensors[2 * i + 1].tensor;
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

}  // namespace sinreq
