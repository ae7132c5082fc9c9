#include "sctl/neural/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

namespace sctl {

namespace {

constexpr std::array<char, 5> kMagic{'S', 'C', 'T', 'L', '1'};
constexpr std::uint64_t kMaxCount = std::uint64_t{1} << 32;

template <typename U>
void put_le(std::ostream& os, U value) {
  std::array<char, sizeof(U)> bytes;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  os.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& is) {
  std::array<unsigned char, sizeof(U)> bytes;
  if (!is.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw InputError("checkpoint: truncated file");
  }
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

void put_f64(std::ostream& os, double v) { put_le(os, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::istream& is) { return std::bit_cast<double>(get_le<std::uint64_t>(is)); }

void put_array(std::ostream& os, const std::vector<double>& values) {
  for (double v : values) put_f64(os, v);
}

std::vector<double> get_array(std::istream& is, std::uint64_t count) {
  std::vector<double> out(count);
  for (double& v : out) v = get_f64(is);
  return out;
}

}  // namespace

void write_checkpoint_record(std::ostream& os, const CheckpointRecord& rec) {
  os.write(kMagic.data(), kMagic.size());
  put_le(os, static_cast<std::uint32_t>(rec.sizes.size()));
  for (auto s : rec.sizes) put_le(os, static_cast<std::uint64_t>(s));
  put_f64(os, rec.leak);
  put_le(os, static_cast<std::uint64_t>(rec.params.size()));
  put_array(os, rec.params);
  put_le(os, static_cast<std::uint8_t>(rec.adam ? 1 : 0));
  if (rec.adam) {
    const auto& a = *rec.adam;
    if (a.m.size() != rec.params.size() || a.v.size() != rec.params.size()) {
      throw ShapeError("checkpoint: optimizer moments do not match parameter count");
    }
    put_le(os, static_cast<std::uint64_t>(a.step));
    put_f64(os, a.lr);
    put_f64(os, a.beta1);
    put_f64(os, a.beta2);
    put_f64(os, a.eps);
    put_array(os, a.m);
    put_array(os, a.v);
  }
  if (!os) throw InputError("checkpoint: write failed");
}

CheckpointRecord read_checkpoint_record(std::istream& is) {
  std::array<char, 5> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) {
    throw InputError("checkpoint: bad magic (expected SCTL1)");
  }
  CheckpointRecord rec;
  const auto n = get_le<std::uint32_t>(is);
  if (n < 2 || n > 64) throw InputError("checkpoint: implausible layer count");
  for (std::uint32_t i = 0; i < n; ++i) {
    rec.sizes.push_back(static_cast<std::int64_t>(get_le<std::uint64_t>(is)));
  }
  rec.leak = get_f64(is);
  const auto count = get_le<std::uint64_t>(is);
  if (count > kMaxCount) throw InputError("checkpoint: implausible parameter count");
  rec.params = get_array(is, count);
  const auto has_adam = get_le<std::uint8_t>(is);
  if (has_adam > 1) throw InputError("checkpoint: corrupt optimizer flag");
  if (has_adam == 1) {
    CheckpointRecord::Adam a;
    a.step = static_cast<std::int64_t>(get_le<std::uint64_t>(is));
    a.lr = get_f64(is);
    a.beta1 = get_f64(is);
    a.beta2 = get_f64(is);
    a.eps = get_f64(is);
    a.m = get_array(is, count);
    a.v = get_array(is, count);
    rec.adam = std::move(a);
  }
  return rec;
}

}  // namespace sctl
