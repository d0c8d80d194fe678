#include "fashionista/model_io.h"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "fashionista/error.h"

namespace fashionista {
namespace {

constexpr std::array<char, 8> kMagic = {'F', 'S', 'H', 'M', '0', '0', '0', '1'};
// Upper bounds guard allocations against corrupted headers.
constexpr std::uint64_t kMaxDim = std::uint64_t{1} << 32;
constexpr std::uint32_t kMaxStringBytes = 1u << 20;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void u32(std::uint32_t v) { little_endian(v, 4); }
  void u64(std::uint64_t v) { little_endian(v, 8); }
  void i64(std::int64_t v) { little_endian(static_cast<std::uint64_t>(v), 8); }
  void f64(double v) { little_endian(std::bit_cast<std::uint64_t>(v), 8); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void block(const std::vector<double>& values) {
    for (double v : values) f64(v);
  }

 private:
  void little_endian(std::uint64_t v, int bytes) {
    char buf[8];
    for (int b = 0; b < bytes; ++b) buf[b] = static_cast<char>((v >> (8 * b)) & 0xff);
    out_.write(buf, bytes);
  }
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(little_endian(4)); }
  std::uint64_t u64() { return little_endian(8); }
  std::int64_t i64() { return static_cast<std::int64_t>(little_endian(8)); }
  double f64() { return std::bit_cast<double>(little_endian(8)); }
  std::string str() {
    const std::uint32_t len = u32();
    if (len > kMaxStringBytes) fail("string length out of range");
    std::string s(len, '\0');
    read(s.data(), len);
    return s;
  }
  void block(std::vector<double>& values) {
    for (double& v : values) v = f64();
  }
  void read(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) fail("truncated file");
  }
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

  [[noreturn]] static void fail(const std::string& what) {
    throw Error(ErrorCode::kBadModelFile, what);
  }

 private:
  std::uint64_t little_endian(int bytes) {
    unsigned char buf[8];
    read(reinterpret_cast<char*>(buf), static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int b = 0; b < bytes; ++b) v |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
    return v;
  }
  std::istream& in_;
};

}  // namespace

void write_model(std::ostream& out, const FashionModel& model) {
  Writer w(out);
  out.write(kMagic.data(), kMagic.size());
  w.u64(model.feature_dim());
  w.u64(model.visual_dim());
  w.u64(model.latent_dim());
  w.u64(model.num_epochs());
  w.u64(model.num_items());
  w.u64(model.num_users());
  for (const auto& id : model.item_ids()) w.str(id);
  for (const auto& id : model.user_ids()) w.str(id);
  for (auto b : model.epochs.boundaries) w.i64(b);
  for (const auto& label : model.epochs.labels) w.str(label);
  w.block(model.embedding.data());
  w.block(model.epoch_weights.data());
  w.block(model.item_bias);
  w.block(model.item_epoch_bias.data());
  w.block(model.user_factors.data());
  w.block(model.item_factors.data());
  w.block(model.user_visual_offset.data());
}

FashionModel read_model(std::istream& in) {
  Reader r(in);
  std::array<char, 8> magic{};
  r.read(magic.data(), magic.size());
  if (magic != kMagic) Reader::fail("bad magic header (expected FSHM0001)");

  std::array<std::uint64_t, 6> dims{};
  for (auto& d : dims) {
    d = r.u64();
    if (d >= kMaxDim) Reader::fail("dimension out of range");
  }
  const auto [f_dim, k_dim, l_dim, epochs, items, users] = dims;
  if (k_dim == 0 || epochs == 0) Reader::fail("empty visual dimension or epoch table");

  std::vector<std::string> item_ids(items), user_ids(users);
  for (auto& id : item_ids) id = r.str();
  for (auto& id : user_ids) id = r.str();
  EpochTable table;
  table.boundaries.resize(epochs + 1);
  for (auto& b : table.boundaries) b = r.i64();
  table.labels.resize(epochs);
  for (auto& label : table.labels) label = r.str();

  FashionModel model;
  try {
    table.validate();
    model.reset(std::move(item_ids), std::move(user_ids), std::move(table), f_dim, k_dim, l_dim);
  } catch (const Error& e) {
    Reader::fail(std::string("inconsistent header: ") + e.what());
  }
  r.block(model.embedding.data());
  r.block(model.epoch_weights.data());
  r.block(model.item_bias);
  r.block(model.item_epoch_bias.data());
  r.block(model.user_factors.data());
  r.block(model.item_factors.data());
  r.block(model.user_visual_offset.data());
  if (!r.at_end()) Reader::fail("trailing bytes after parameter blocks");
  if (!model.is_consistent()) Reader::fail("non-finite parameters");
  return model;
}

void save_model(const std::filesystem::path& path, const FashionModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write model " + path.string());
  write_model(out, model);
  if (!out) throw Error(ErrorCode::kIoError, "failed writing model " + path.string());
}

FashionModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open model " + path.string());
  return read_model(in);
}

}  // namespace fashionista
