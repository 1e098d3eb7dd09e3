#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace wsnet {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
template <typename Scalar>
using SparseMatrixX = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using RowVector = RowVectorX<double>;
using SparseMatrix = SparseMatrixX<double>;
using IndexList = std::vector<Index>;

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: out-of-range index, bad shape, invalid option.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A NaN or Inf appeared in a forward value.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Configuration file or flag values rejected.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Dataset files missing or inconsistent.
class DatasetError : public Error {
 public:
  using Error::Error;
};

// Every random stream is derived from one user seed plus a component tag,
// so adding a new consumer never shifts existing streams.
enum class SeedTag : std::uint64_t {
  kSplits = 1,
  kInit = 2,
  kCorruption = 3,
  kKMeans = 4,
  kContrast = 5,
  kCommunities = 6,
  kSyntheticLfs = 7,
  kSbm = 8,
  kPairReport = 9,
  kFold = 10,
};

std::uint64_t derive_seed(std::uint64_t seed, SeedTag tag, std::uint64_t index = 0);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// Writes to stderr under a process-wide lock; silenced by set_warnings_enabled(false).
void warn(std::string_view message);
void set_warnings_enabled(bool enabled);

/// Keeps large freed blocks in the heap instead of returning them to the OS.
/// Training reallocates same-sized matrices every epoch; this avoids the
/// mmap/munmap churn. No-op outside glibc.
void retain_heap_memory();

}  // namespace wsnet
