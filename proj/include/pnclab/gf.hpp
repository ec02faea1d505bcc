#pragma once

// Arithmetic over GF(2^m) for m in {4, 8, 16} and the dense linear algebra
// (rank, reduced row-echelon form, decoding) built on top of it.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pnclab::gf {

using Elem = std::uint16_t;

class ZeroInverse : public std::domain_error {
 public:
  ZeroInverse() : std::domain_error("inverse of zero in GF(2^m)") {}
};

class DimensionMismatch : public std::invalid_argument {
 public:
  explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};

class InvalidField : public std::invalid_argument {
 public:
  explicit InvalidField(const std::string& what) : std::invalid_argument(what) {}
};

/// Default irreducible polynomial for a supported extension degree.
std::uint32_t default_modulus(unsigned m);

/// Exhaustive trial division by every polynomial of degree 1..deg/2.
bool is_irreducible(std::uint32_t poly);

/// GF(2^m) with exp/log tables. Immutable once constructed, so one instance
/// can be shared by any number of threads.
class Field {
 public:
  explicit Field(unsigned m);
  Field(unsigned m, std::uint32_t modulus);

  /// Process-wide instance with the default modulus.
  static const Field& standard(unsigned m);

  unsigned degree() const { return m_; }
  std::uint32_t modulus() const { return modulus_; }
  std::uint32_t order() const { return std::uint32_t{1} << m_; }
  Elem generator() const { return generator_; }
  bool contains(std::uint32_t v) const { return v < order(); }

  static Elem add(Elem a, Elem b) { return static_cast<Elem>(a ^ b); }
  static Elem sub(Elem a, Elem b) { return static_cast<Elem>(a ^ b); }

  Elem mul(Elem a, Elem b) const {
    if (a == 0 || b == 0) return 0;
    return exp_[log_[a] + log_[b]];
  }
  Elem inv(Elem a) const {
    if (a == 0) throw ZeroInverse();
    return exp_[(order() - 1) - log_[a]];
  }
  Elem div(Elem a, Elem b) const { return mul(a, inv(b)); }

 private:
  unsigned m_;
  std::uint32_t modulus_;
  Elem generator_ = 0;
  std::vector<Elem> exp_;           // 2 * (q - 1) entries, no modular index needed
  std::vector<std::uint32_t> log_;  // log_[0] unused
};

/// Coded packet: k-symbol coding header followed by an l-symbol payload.
struct Packet {
  std::vector<Elem> header;
  std::vector<Elem> payload;

  bool operator==(const Packet&) const = default;
  bool is_zero() const;
};

Packet zero_packet(std::size_t k, std::size_t l);

/// (e_i | message) with e_i the i-th unit vector of length k.
Packet unit_packet(std::size_t k, std::size_t i, std::span<const Elem> message);

/// y += c * x over header and payload.
void axpy(const Field& field, Elem c, const Packet& x, Packet& y);

/// Sum of coeffs[i] * vectors[i]; the zero packet of shape (k, l) when empty.
Packet linear_combination(const Field& field, std::span<const Elem> coeffs,
                          std::span<const Packet> vectors, std::size_t k, std::size_t l);

/// Dense row-major matrix over GF(2^m).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0) {}

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<std::vector<Elem>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Elem& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  Elem at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<Elem> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const Elem> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  void swap_rows(std::size_t a, std::size_t b);

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Elem> data_;
};

Matrix multiply(const Field& field, const Matrix& a, const Matrix& b);

/// Reduces m in place to reduced row-echelon form, choosing pivots only among
/// the first pivot_cols columns (first nonzero entry, lowest row index).
/// Returns the number of pivots found.
std::size_t reduce_rref(const Field& field, Matrix& m, std::size_t pivot_cols);

std::size_t rank(const Field& field, Matrix m);

/// Rows are the headers of the given packets.
Matrix header_matrix(std::span<const Packet> packets, std::size_t k);

std::size_t header_rank(const Field& field, std::span<const Packet> packets, std::size_t k);

struct DecodeResult {
  std::size_t rank = 0;
  /// k recovered payloads, present iff rank == k.
  std::optional<std::vector<std::vector<Elem>>> messages;

  bool decoded() const { return messages.has_value(); }
};

/// Gaussian elimination on [header | payload]. DimensionMismatch when the
/// packets disagree on (k, l).
DecodeResult decode(const Field& field, std::span<const Packet> packets, std::size_t k);

/// payload == header * messages, messages being the k x l message matrix.
bool is_consistent(const Field& field, const Packet& p, const Matrix& messages);

/// The header of p lies in the row space spanned by the headers of basis.
bool in_span(const Field& field, std::span<const Packet> basis, const Packet& p, std::size_t k);

}  // namespace pnclab::gf
