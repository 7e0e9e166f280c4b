#pragma once

#include <stdexcept>
#include <string>

namespace noble {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Geometry / quantization.
class OutOfBounds : public Error { public: using Error::Error; };
class UnoccupiedCell : public Error { public: using Error::Error; };

// Datasets.
class EmptyDataset : public Error { public: using Error::Error; };
class MissingFile : public Error { public: using Error::Error; };
class AlreadyNormalized : public Error { public: using Error::Error; };
class InsufficientWalk : public Error { public: using Error::Error; };

/// Malformed field in a tabular input; carries 1-based row/column.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t row, std::size_t col)
      : Error(what + " (row " + std::to_string(row) + ", column " +
              std::to_string(col) + ")"),
        row_(row),
        col_(col) {}
  std::size_t row() const { return row_; }
  std::size_t column() const { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

// Neural net.
class DimensionMismatch : public Error { public: using Error::Error; };
class StaleCache : public Error { public: using Error::Error; };

class DivergedLoss : public Error {
 public:
  DivergedLoss(const std::string& what, int epoch)
      : Error(what + " at epoch " + std::to_string(epoch)), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

// Manifold baselines.
class DegenerateInput : public Error { public: using Error::Error; };
class DisconnectedGraph : public Error { public: using Error::Error; };
class NonSymmetric : public Error { public: using Error::Error; };
class NegativeEntries : public Error { public: using Error::Error; };
class SingularLocalGram : public Error { public: using Error::Error; };

// Models.
class UnknownStartLocation : public Error { public: using Error::Error; };

// Theory checks.
class NotNormalized : public Error { public: using Error::Error; };
class NoQualifyingPairs : public Error { public: using Error::Error; };

// Reporting / IO.
class EmptyEvaluation : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };

}  // namespace noble
