#include "pedintent/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "pedintent/error.hpp"

namespace pedintent {

namespace {

class Out {
 public:
  void magic(const char* m) { buf.insert(buf.end(), m, m + 4); }
  void u32(std::uint32_t v) { le(v); }
  void u64(std::uint64_t v) { le(v); }
  void i32(std::int32_t v) { le(static_cast<std::uint32_t>(v)); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
  void f64s(std::span<const double> v) {
    for (double x : v) f64(x);
  }
  std::vector<std::uint8_t> buf;

 private:
  template <typename U>
  void le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
};

class In {
 public:
  explicit In(const std::vector<std::uint8_t>& b) : buf_(b) {}
  std::string magic() {
    need(4);
    std::string m(reinterpret_cast<const char*>(buf_.data() + pos_), 4);
    pos_ += 4;
    return m;
  }
  std::uint8_t u8() { return le<std::uint8_t>(); }
  std::uint32_t u32() { return le<std::uint32_t>(); }
  std::uint64_t u64() { return le<std::uint64_t>(); }
  std::int32_t i32() { return static_cast<std::int32_t>(le<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
  std::vector<double> f64s(std::uint64_t n) {
    need(n * 8);
    std::vector<double> v(n);
    for (auto& x : v) x = f64();
    return v;
  }
  std::size_t count(std::uint64_t n) {
    if (n > buf_.size()) throw DataError("model file: implausible size field");
    return static_cast<std::size_t>(n);
  }
  void finish() const {
    if (pos_ != buf_.size()) throw DataError("model file: trailing bytes");
  }

 private:
  void need(std::uint64_t n) const {
    if (buf_.size() - pos_ < n) throw DataError("model file truncated");
  }
  template <typename U>
  U le() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf_[pos_ + i]) << (8 * i);
    pos_ += sizeof(U);
    return v;
  }
  const std::vector<std::uint8_t>& buf_;
  std::size_t pos_ = 0;
};

void put_matrix(Out& o, const Matrix& m) {
  o.u64(m.rows());
  o.u64(m.cols());
  o.f64s(m.data());
}

Matrix get_matrix(In& in) {
  const auto rows = in.count(in.u64());
  const auto cols = in.count(in.u64());
  Matrix m(rows, cols);
  const auto values = in.f64s(static_cast<std::uint64_t>(rows) * cols);
  std::copy(values.begin(), values.end(), m.data().begin());
  return m;
}

const char* magic_for(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::knn: return "PKNN";
    case ClassifierKind::svm: return "PSVM";
    case ClassifierKind::ann: return "PMLP";
    case ClassifierKind::dt: return "PCRT";
  }
  return "????";
}

}  // namespace

std::vector<std::uint8_t> encode_model(const TrainedModel& model) {
  Out o;
  o.magic(magic_for(model.kind()));
  o.u32(kModelFormatVersion);
  const auto& s = model.scaler();
  o.u64(s.dimension());
  o.f64s(s.means);
  o.f64s(s.stds);
  for (bool c : s.constant) o.buf.push_back(c ? 1 : 0);

  if (const auto* m = std::get_if<KnnModel>(&model.model())) {
    o.i32(m->k);
    put_matrix(o, m->points);
    for (int l : m->labels) o.i32(l);
  } else if (const auto* m = std::get_if<SvmModel>(&model.model())) {
    put_matrix(o, m->support_vectors);
    o.f64s(m->dual_coeffs);
    o.f64(m->bias);
    o.f64(m->C);
    o.u32(m->converged ? 1 : 0);
    o.u64(m->iterations);
    o.f64(m->kkt_violation);
  } else if (const auto* m = std::get_if<MlpModel>(&model.model())) {
    o.u64(m->input_dim);
    o.u64(m->hidden);
    o.f64s(m->params);
  } else if (const auto* m = std::get_if<TreeModel>(&model.model())) {
    o.u64(m->input_dim);
    o.u64(m->nodes.size());
    for (const auto& n : m->nodes) {
      o.i32(n.feature);
      o.f64(n.threshold);
      o.i32(n.left);
      o.i32(n.right);
      o.i32(n.label);
      o.f64(n.purity);
    }
  }
  return std::move(o.buf);
}

TrainedModel decode_model(const std::vector<std::uint8_t>& bytes) {
  In in(bytes);
  const auto magic = in.magic();
  const auto version = in.u32();
  if (version != kModelFormatVersion) {
    throw DataError("model file version " + std::to_string(version) + " is not supported (expected " +
                    std::to_string(kModelFormatVersion) + ")");
  }
  Standardizer s;
  const auto d = in.count(in.u64());
  s.means = in.f64s(d);
  s.stds = in.f64s(d);
  s.constant.resize(d);
  for (std::size_t c = 0; c < d; ++c) s.constant[c] = in.u8() != 0;

  if (magic == "PKNN") {
    KnnModel m;
    m.k = in.i32();
    m.points = get_matrix(in);
    m.labels.resize(m.points.rows());
    for (auto& l : m.labels) l = in.i32();
    in.finish();
    return {std::move(s), std::move(m)};
  }
  if (magic == "PSVM") {
    SvmModel m;
    m.support_vectors = get_matrix(in);
    m.dual_coeffs = in.f64s(m.support_vectors.rows());
    m.bias = in.f64();
    m.C = in.f64();
    m.converged = in.u32() != 0;
    m.iterations = in.count(in.u64());
    m.kkt_violation = in.f64();
    in.finish();
    return {std::move(s), std::move(m)};
  }
  if (magic == "PMLP") {
    MlpModel m;
    m.input_dim = in.count(in.u64());
    m.hidden = in.count(in.u64());
    m.params = in.f64s(MlpModel::size_for(m.input_dim, m.hidden));
    in.finish();
    return {std::move(s), std::move(m)};
  }
  if (magic == "PCRT") {
    TreeModel m;
    m.input_dim = in.count(in.u64());
    m.nodes.resize(in.count(in.u64()));
    for (auto& n : m.nodes) {
      n.feature = in.i32();
      n.threshold = in.f64();
      n.left = in.i32();
      n.right = in.i32();
      n.label = in.i32();
      n.purity = in.f64();
    }
    in.finish();
    return {std::move(s), std::move(m)};
  }
  throw DataError("unknown model magic '" + magic + "'");
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  const auto bytes = encode_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), {}};
  return decode_model(bytes);
}

}  // namespace pedintent
