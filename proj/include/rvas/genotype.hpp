#ifndef RVAS_GENOTYPE_HPP
#define RVAS_GENOTYPE_HPP

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rvas/error.hpp"

namespace rvas::sim {

enum class PloidyMode { binary, diploid };

enum class KtonMode { exact, at_most };

// Whether a homozygous diploid entry counts its individual once (the only
// rule currently defined) when tallying a column's carriers.
enum class CarrierRule { any_nonzero };

// Dense individuals-by-variants matrix. Columns are variants in order of
// appearance; rows are individuals. Entries are {0,1} in binary mode and
// {0,1,2} in diploid mode.
class GenotypeMatrix {
 public:
  GenotypeMatrix() = default;
  GenotypeMatrix(std::string population_id, long rows, long cols, PloidyMode mode)
      : population_id_(std::move(population_id)),
        rows_(rows),
        cols_(cols),
        mode_(mode),
        data_(static_cast<std::size_t>(rows * cols), 0) {
    detail::require(rows >= 0 && cols >= 0, "GenotypeMatrix: negative shape");
  }

  const std::string& population_id() const { return population_id_; }
  long rows() const { return rows_; }
  long cols() const { return cols_; }
  PloidyMode mode() const { return mode_; }

  std::int8_t operator()(long r, long c) const { return data_[index(r, c)]; }
  std::int8_t& operator()(long r, long c) { return data_[index(r, c)]; }

  long max_entry() const { return mode_ == PloidyMode::binary ? 1 : 2; }

  long column_carriers(long c) const {
    long count = 0;
    for (long r = 0; r < rows_; ++r)
      if (data_[index(r, c)] > 0) ++count;
    return count;
  }

  bool column_is_zero(long c) const { return column_carriers(c) == 0; }

  void validate_entries() const {
    const std::int8_t top = static_cast<std::int8_t>(max_entry());
    for (std::int8_t v : data_)
      detail::require(v >= 0 && v <= top, "GenotypeMatrix: entry outside ploidy range");
  }

 private:
  std::size_t index(long r, long c) const { return static_cast<std::size_t>(r) * cols_ + c; }

  std::string population_id_;
  long rows_ = 0;
  long cols_ = 0;
  PloidyMode mode_ = PloidyMode::binary;
  std::vector<std::int8_t> data_;
};

// Number of columns whose carrier count equals k (exact) or lies in [1, k]
// (at_most).
inline long count_ktons(const GenotypeMatrix& m, long k, KtonMode mode,
                        CarrierRule /*rule*/ = CarrierRule::any_nonzero) {
  detail::require(k >= 1, "count_ktons: k must be >= 1");
  long count = 0;
  for (long c = 0; c < m.cols(); ++c) {
    const long carriers = m.column_carriers(c);
    if (mode == KtonMode::exact ? carriers == k : (carriers >= 1 && carriers <= k)) ++count;
  }
  return count;
}

// k-tons of `target` whose column is empty in every matrix of `others`.
// All matrices must share the column index space (jointly generated).
inline long count_exclusive_ktons(const GenotypeMatrix& target,
                                  const std::vector<const GenotypeMatrix*>& others, long k,
                                  KtonMode mode, CarrierRule rule = CarrierRule::any_nonzero) {
  detail::require(k >= 1, "count_exclusive_ktons: k must be >= 1");
  for (const auto* o : others)
    detail::require(o != nullptr && o->cols() == target.cols(),
                    "count_exclusive_ktons: inconsistent column spaces");
  (void)rule;
  long count = 0;
  for (long c = 0; c < target.cols(); ++c) {
    const long carriers = target.column_carriers(c);
    const bool is_kton = mode == KtonMode::exact ? carriers == k : (carriers >= 1 && carriers <= k);
    if (!is_kton) continue;
    bool shared = false;
    for (const auto* o : others) {
      if (!o->column_is_zero(c)) {
        shared = true;
        break;
      }
    }
    if (!shared) ++count;
  }
  return count;
}

// Debug dump format:
//   #rvas-matrix v1 pop=<id> mode=<binary|diploid> rows=<n> cols=<L>
// followed by one space-separated row per individual.
inline void write_matrix(std::ostream& os, const GenotypeMatrix& m) {
  os << "#rvas-matrix v1 pop=" << m.population_id()
     << " mode=" << (m.mode() == PloidyMode::binary ? "binary" : "diploid") << " rows=" << m.rows()
     << " cols=" << m.cols() << "\n";
  for (long r = 0; r < m.rows(); ++r) {
    for (long c = 0; c < m.cols(); ++c) {
      if (c) os << ' ';
      os << static_cast<int>(m(r, c));
    }
    os << "\n";
  }
}

inline GenotypeMatrix read_matrix(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw io_error("read_matrix: missing header");
  std::istringstream hs(header);
  std::string magic, ver, kv;
  hs >> magic >> ver;
  if (magic != "#rvas-matrix" || ver != "v1") throw io_error("read_matrix: bad header: " + header);
  std::string pop, mode_str;
  long rows = -1, cols = -1;
  while (hs >> kv) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw io_error("read_matrix: bad header field: " + kv);
    std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
    try {
      if (key == "pop")
        pop = val;
      else if (key == "mode")
        mode_str = val;
      else if (key == "rows")
        rows = std::stol(val);
      else if (key == "cols")
        cols = std::stol(val);
    } catch (const std::exception&) {
      throw io_error("read_matrix: bad header value: " + kv);
    }
  }
  if (rows < 0 || cols < 0 || (mode_str != "binary" && mode_str != "diploid"))
    throw io_error("read_matrix: incomplete header: " + header);
  GenotypeMatrix m(pop, rows, cols, mode_str == "binary" ? PloidyMode::binary : PloidyMode::diploid);
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      int v;
      if (!(is >> v)) throw io_error("read_matrix: truncated data");
      m(r, c) = static_cast<std::int8_t>(v);
    }
  }
  m.validate_entries();
  return m;
}

}  // namespace rvas::sim

#endif  // RVAS_GENOTYPE_HPP
