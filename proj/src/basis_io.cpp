#include "rbhom/basis_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>
#include <vector>

#include "rbhom/errors.hpp"

namespace rbhom {

namespace {

constexpr char kMagic[8] = {'R', 'B', 'H', 'O', 'M', '0', '0', '1'};

std::uint64_t fnv1a(const std::vector<unsigned char>& bytes, std::size_t count) {
  std::uint64_t h = 14695981039346656037ULL;
  for (std::size_t i = 0; i < count; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

class Writer {
 public:
  template <typename T>
  void put(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    bytes_.insert(bytes_.end(), raw, raw + sizeof(T));
  }
  void put_raw(const char* data, std::size_t n) { bytes_.insert(bytes_.end(), data, data + n); }
  template <typename Derived>
  void put_matrix(const Eigen::DenseBase<Derived>& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (Eigen::Index r = 0; r < m.rows(); ++r) put<double>(m(r, c));
    }
  }
  std::vector<unsigned char>& bytes() { return bytes_; }

 private:
  std::vector<unsigned char> bytes_;
};

class Reader {
 public:
  Reader(const std::vector<unsigned char>& bytes, std::size_t limit) : bytes_(bytes), limit_(limit) {}
  template <typename T>
  T get() {
    require(sizeof(T));
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, raw, sizeof(T));
    return value;
  }
  void get_raw(char* out, std::size_t n) {
    require(n);
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }
  Eigen::MatrixXd get_matrix(Eigen::Index rows, Eigen::Index cols) {
    require(static_cast<std::size_t>(rows * cols) * sizeof(double));
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
      for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = get<double>();
    }
    return m;
  }
  std::size_t position() const { return pos_; }

 private:
  void require(std::size_t n) const {
    if (pos_ + n > limit_) throw BasisFileError("basis file truncated");
  }
  const std::vector<unsigned char>& bytes_;
  std::size_t limit_;
  std::size_t pos_ = 0;
};

}  // namespace

class BasisSerializer {
 public:
  static std::vector<unsigned char> encode(const ReducedBasis& b) {
    Writer w;
    w.put_raw(kMagic, sizeof(kMagic));
    const std::uint64_t n = b.size();
    const std::uint64_t dim = b.vectors_.empty() ? 0 : static_cast<std::uint64_t>(b.vectors_.front().size());
    w.put<std::uint32_t>(kBasisFormatVersion);
    w.put<std::int32_t>(b.n_per_side_);
    w.put<std::uint64_t>(n);
    w.put<double>(b.box_.delta);
    w.put<double>(b.box_.theta0);
    w.put<std::uint64_t>(b.provenance_.size());
    w.put<std::uint64_t>(b.fingerprint_);
    w.put<std::uint64_t>(dim);
    w.put<std::uint64_t>(static_cast<std::uint64_t>(b.riesz_factor_.rows()));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(b.riesz_factor_.cols()));
    for (const auto& v : b.vectors_) w.put_matrix(v);
    for (const auto& m : b.stiffness_) w.put_matrix(m);
    for (const auto& l : b.loads_) w.put_matrix(l);
    w.put_matrix(b.riesz_factor_);
    for (std::size_t r : b.rows_upto_) w.put<std::uint64_t>(r);
    for (const Selection& s : b.provenance_) {
      w.put<std::uint64_t>(s.param_id);
      w.put<double>(s.param.b1);
      w.put<double>(s.param.c1);
      w.put<double>(s.param.b2);
      w.put<double>(s.param.c2);
      w.put<double>(s.param.theta);
      w.put<std::int32_t>(static_cast<std::int32_t>(s.dir));
      w.put<double>(s.bound);
    }
    w.put<std::uint64_t>(fnv1a(w.bytes(), w.bytes().size()));
    return std::move(w.bytes());
  }

  static ReducedBasis decode(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < sizeof(kMagic) + sizeof(std::uint64_t)) throw BasisFileError("basis file truncated");
    const std::size_t body = bytes.size() - sizeof(std::uint64_t);
    Reader r(bytes, bytes.size());
    char magic[8];
    r.get_raw(magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw BasisFileError("bad magic: not a basis container");
    const auto version = r.get<std::uint32_t>();
    if (version != kBasisFormatVersion) {
      throw BasisFileError("unsupported basis format version " + std::to_string(version));
    }
    ReducedBasis b;
    b.n_per_side_ = r.get<std::int32_t>();
    const auto n = r.get<std::uint64_t>();
    b.box_.delta = r.get<double>();
    b.box_.theta0 = r.get<double>();
    const auto prov = r.get<std::uint64_t>();
    b.fingerprint_ = r.get<std::uint64_t>();
    const auto dim = r.get<std::uint64_t>();
    const auto rows = r.get<std::uint64_t>();
    const auto cols = r.get<std::uint64_t>();
    if (cols != ReducedBasis::riesz_columns(n) || prov != n || rows > cols || (n > 0 && dim == 0) ||
        n > (1u << 20) || dim > (1u << 28)) {
      throw BasisFileError("inconsistent basis header");
    }
    // Payload sizes are known from the header; check before allocating.
    const std::uint64_t doubles = n * dim + kAffineTerms * (n * n + n) + rows * cols;
    const std::uint64_t need = r.position() + 8 * doubles + 8 * (cols + 1) + n * (8 + 5 * 8 + 4 + 8) + 8;
    if (bytes.size() < need) throw BasisFileError("basis file truncated");
    if (bytes.size() > need) throw BasisFileError("trailing bytes after basis payload");
    std::uint64_t stored = 0;
    for (int i = 0; i < 8; ++i) stored |= static_cast<std::uint64_t>(bytes[body + i]) << (8 * i);
    if (stored != fnv1a(bytes, body)) throw BasisFileError("basis checksum mismatch (corrupt file)");

    const auto ni = static_cast<Eigen::Index>(n);
    for (std::uint64_t k = 0; k < n; ++k) b.vectors_.push_back(r.get_matrix(static_cast<Eigen::Index>(dim), 1).col(0));
    for (auto& m : b.stiffness_) m = r.get_matrix(ni, ni);
    for (auto& l : b.loads_) l = r.get_matrix(ni, 1);
    b.riesz_factor_ = r.get_matrix(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    b.rows_upto_.clear();
    for (std::uint64_t c = 0; c <= cols; ++c) b.rows_upto_.push_back(r.get<std::uint64_t>());
    for (std::uint64_t k = 0; k < n; ++k) {
      Selection s;
      s.param_id = r.get<std::uint64_t>();
      s.param.b1 = r.get<double>();
      s.param.c1 = r.get<double>();
      s.param.b2 = r.get<double>();
      s.param.c2 = r.get<double>();
      s.param.theta = r.get<double>();
      s.dir = static_cast<Direction>(r.get<std::int32_t>());
      s.bound = r.get<double>();
      b.provenance_.push_back(s);
    }
    return b;
  }
};

void save_basis(const ReducedBasis& basis, const std::filesystem::path& path) {
  const auto bytes = BasisSerializer::encode(basis);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw BasisFileError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw BasisFileError("failed writing " + path.string());
}

ReducedBasis load_basis(const std::filesystem::path& path, const AffineSystem& system) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BasisFileError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ReducedBasis basis = BasisSerializer::decode(bytes);
  if (basis.n_per_side() != system.mesh().n_per_side() || basis.fingerprint() != system.fingerprint()) {
    std::ostringstream os;
    os << "basis fingerprint mismatch: file built for n_per_side=" << basis.n_per_side()
       << ", system has n_per_side=" << system.mesh().n_per_side();
    throw BasisFileError(os.str());
  }
  const auto& v = basis.vectors();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i].size() != system.dimension()) throw BasisFileError("basis vector dimension mismatch");
    for (std::size_t j = 0; j <= i; ++j) {
      const double g = h1_semi_inner(v[i], v[j], system.reference_laplacian());
      if (std::abs(g - (i == j ? 1.0 : 0.0)) > 1e-10) throw BasisFileError("basis is not orthonormal");
    }
  }
  return basis;
}

std::string fingerprint_hex(std::uint64_t fingerprint) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fingerprint;
  return os.str();
}

}  // namespace rbhom
