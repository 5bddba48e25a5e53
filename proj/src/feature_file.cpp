#include "pedintent/feature_file.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

#include "pedintent/error.hpp"

namespace pedintent {

namespace {

constexpr char kMagic[4] = {'C', 'N', 'N', 'F'};

class Writer {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  template <typename T>
  void le(T value) {
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
  }
  void f32(float v) { le(std::bit_cast<std::uint32_t>(v)); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& in, std::string_view source) : in_(in), source_(source) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(std::string(source_) + ": " + what + " (offset " + std::to_string(pos_) + ")");
  }
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) fail("truncated feature file");
  }
  template <typename T>
  T le() {
    need(sizeof(T));
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      u |= static_cast<std::make_unsigned_t<T>>(in_[pos_ + i]) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }
  float f32() { return std::bit_cast<float>(le<std::uint32_t>()); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  const std::vector<std::uint8_t>& in_;
  std::string_view source_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_feature_file(const FeatureFile& file) {
  Writer w;
  w.bytes(kMagic, 4);
  w.le(kFeatureFileVersion);
  w.le(static_cast<std::uint64_t>(file.records.size()));
  w.le(file.dimension);
  for (const auto& rec : file.records) {
    if (rec.id.size() > 0xffff) throw DataError("sample id too long: " + rec.id.substr(0, 64));
    if (rec.values.size() != file.dimension) {
      throw DataError("record " + rec.id + " has " + std::to_string(rec.values.size()) +
                      " values, header dimension is " + std::to_string(file.dimension));
    }
    w.le(static_cast<std::uint16_t>(rec.id.size()));
    w.bytes(rec.id.data(), rec.id.size());
    for (float v : rec.values) w.f32(v);
  }
  return w.take();
}

FeatureFile decode_feature_file(const std::vector<std::uint8_t>& bytes, std::string_view source) {
  Reader r(bytes, source);
  if (r.str(4) != std::string_view(kMagic, 4)) r.fail("bad magic, expected CNNF");
  const auto version = r.le<std::uint32_t>();
  if (version != kFeatureFileVersion) r.fail("unsupported version " + std::to_string(version));
  const auto count = r.le<std::uint64_t>();
  FeatureFile file;
  file.dimension = r.le<std::uint32_t>();
  if (file.dimension == 0) r.fail("zero dimension");

  std::set<std::string> ids;
  for (std::uint64_t i = 0; i < count; ++i) {
    FeatureRecord rec;
    rec.id = r.str(r.le<std::uint16_t>());
    if (!ids.insert(rec.id).second) r.fail("duplicate sample id '" + rec.id + "'");
    rec.values.resize(file.dimension);
    for (auto& v : rec.values) {
      v = r.f32();
      if (!std::isfinite(v)) r.fail("non-finite value in record '" + rec.id + "'");
    }
    file.records.push_back(std::move(rec));
  }
  if (!r.done()) r.fail("trailing bytes after last record");
  return file;
}

void write_feature_file(const FeatureFile& file, const std::filesystem::path& path) {
  const auto bytes = encode_feature_file(file);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write feature file " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

FeatureFile read_feature_file(const std::filesystem::path& path,
                              std::optional<std::uint32_t> expected_dimension) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open feature file " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), {}};
  auto file = decode_feature_file(bytes, path.string());
  if (expected_dimension && file.dimension != *expected_dimension) {
    throw DataError(path.string() + ": dimension " + std::to_string(file.dimension) +
                    ", expected " + std::to_string(*expected_dimension));
  }
  return file;
}

std::map<std::string, FeatureVector> load_cnn_features(const std::filesystem::path& path) {
  auto file = read_feature_file(path, static_cast<std::uint32_t>(descriptor_length(FeatureSource::cnn)));
  std::map<std::string, FeatureVector> out;
  for (auto& rec : file.records) {
    FeatureVector fv{rec.id, FeatureSource::cnn, {rec.values.begin(), rec.values.end()}};
    out.emplace(rec.id, std::move(fv));
  }
  return out;
}

}  // namespace pedintent
