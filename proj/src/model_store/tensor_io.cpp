#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "cliplab/model_store.hpp"

namespace cliplab {
namespace {

constexpr std::array<char, 8> kMagic = {'C', 'L', 'I', 'P', 'T', 'N', 'S', '1'};
constexpr std::uint32_t kMaxRank = 8;

template <typename T>
T load_le(const unsigned char* p) {
  static_assert(std::is_unsigned_v<T>);
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(p[i]) << (8 * i);
  return v;
}

template <typename T>
void store_le(std::string& out, T v) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

}  // namespace

std::size_t TensorBlob::element_count() const {
  std::size_t n = 1;
  for (auto d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

void validate_blob(const TensorBlob& blob) {
  if (blob.element_count() != blob.data.size()) {
    throw Error(ErrorKind::ShapeMismatch,
                blob.name + ": shape holds " + std::to_string(blob.element_count()) +
                    " values but payload has " + std::to_string(blob.data.size()));
  }
  for (std::size_t i = 0; i < blob.data.size(); ++i) {
    if (!std::isfinite(blob.data[i])) {
      throw Error(ErrorKind::NonFiniteValue,
                  blob.name + ": non-finite value at flat index " + std::to_string(i));
    }
  }
}

TensorBlob read_blob(const std::filesystem::path& path, std::string name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t size = bytes.size();
  if (size < kMagic.size() + 4 || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw Error(ErrorKind::UnsupportedFormat, path.string() + ": bad tensor magic");
  }
  std::size_t off = kMagic.size();
  const auto rank = load_le<std::uint32_t>(p + off);
  off += 4;
  if (rank == 0 || rank > kMaxRank || size < off + 8ull * rank) {
    throw Error(ErrorKind::ParseError, path.string() + ": bad rank " + std::to_string(rank));
  }

  TensorBlob blob;
  blob.name = std::move(name);
  std::size_t count = 1;
  for (std::uint32_t i = 0; i < rank; ++i, off += 8) {
    const auto d = load_le<std::uint64_t>(p + off);
    if (d == 0) throw Error(ErrorKind::ShapeMismatch, blob.name + ": zero-length dimension");
    blob.shape.push_back(d);
    count *= d;
  }
  if (size - off != 4 * count) {
    throw Error(ErrorKind::ShapeMismatch,
                blob.name + ": header declares " + std::to_string(count) + " values, file holds " +
                    std::to_string((size - off) / 4));
  }
  blob.data.resize(count);
  for (std::size_t i = 0; i < count; ++i, off += 4) {
    blob.data[i] = std::bit_cast<float>(load_le<std::uint32_t>(p + off));
  }
  validate_blob(blob);
  return blob;
}

void write_blob(const std::filesystem::path& path, const TensorBlob& blob) {
  validate_blob(blob);
  std::string out(kMagic.begin(), kMagic.end());
  out.reserve(out.size() + 4 + 8 * blob.shape.size() + 4 * blob.data.size());
  store_le(out, static_cast<std::uint32_t>(blob.shape.size()));
  for (auto d : blob.shape) store_le(out, static_cast<std::uint64_t>(d));
  for (float v : blob.data) store_le(out, std::bit_cast<std::uint32_t>(v));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(ErrorKind::IoError, "short write to " + path.string());
}

}  // namespace cliplab
