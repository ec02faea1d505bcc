#include "pnclab/gf.hpp"

#include <bit>

namespace pnclab::gf {

namespace {

unsigned poly_degree(std::uint32_t p) { return p == 0 ? 0 : static_cast<unsigned>(std::bit_width(p) - 1); }

std::uint32_t poly_mod(std::uint32_t a, std::uint32_t d) {
  const unsigned dd = poly_degree(d);
  while (a != 0 && poly_degree(a) >= dd) a ^= d << (poly_degree(a) - dd);
  return a;
}

// Carry-less multiply then reduce; only used while building tables.
std::uint32_t slow_mul(std::uint32_t a, std::uint32_t b, std::uint32_t modulus, unsigned m) {
  std::uint32_t r = 0;
  while (b != 0) {
    if (b & 1u) r ^= a;
    b >>= 1;
    a <<= 1;
    if (a & (1u << m)) a ^= modulus;
  }
  return r;
}

}  // namespace

std::uint32_t default_modulus(unsigned m) {
  switch (m) {
    case 4: return 0x13;      // x^4 + x + 1
    case 8: return 0x11B;     // x^8 + x^4 + x^3 + x + 1
    case 16: return 0x1100B;  // x^16 + x^12 + x^3 + x + 1
    default: throw InvalidField("unsupported extension degree " + std::to_string(m));
  }
}

bool is_irreducible(std::uint32_t poly) {
  const unsigned deg = poly_degree(poly);
  if (deg == 0) return false;
  for (std::uint32_t d = 2; poly_degree(d) <= deg / 2; ++d) {
    if (poly_mod(poly, d) == 0) return false;
  }
  return true;
}

Field::Field(unsigned m) : Field(m, default_modulus(m)) {}

Field::Field(unsigned m, std::uint32_t modulus) : m_(m), modulus_(modulus) {
  if (m != 4 && m != 8 && m != 16) throw InvalidField("unsupported extension degree " + std::to_string(m));
  if (poly_degree(modulus) != m) throw InvalidField("modulus degree differs from m");
  if (!is_irreducible(modulus)) throw InvalidField("modulus is reducible");

  const std::uint32_t q = order();
  // The modulus need not be primitive (0x11B is not), so search for a
  // generator of the multiplicative group.
  for (std::uint32_t g = 2; g < q; ++g) {
    std::uint32_t x = 1;
    std::uint32_t steps = 0;
    do {
      x = slow_mul(x, g, modulus_, m_);
      ++steps;
    } while (x != 1 && steps < q);
    if (steps == q - 1) {
      generator_ = static_cast<Elem>(g);
      break;
    }
  }
  if (generator_ == 0 && q > 2) throw InvalidField("no generator found");

  exp_.resize(2 * static_cast<std::size_t>(q - 1));
  log_.assign(q, 0);
  std::uint32_t x = 1;
  for (std::uint32_t i = 0; i < q - 1; ++i) {
    exp_[i] = static_cast<Elem>(x);
    exp_[i + q - 1] = static_cast<Elem>(x);
    log_[x] = i;
    x = slow_mul(x, generator_, modulus_, m_);
  }
}

const Field& Field::standard(unsigned m) {
  static const Field f4(4);
  static const Field f8(8);
  static const Field f16(16);
  switch (m) {
    case 4: return f4;
    case 8: return f8;
    case 16: return f16;
    default: throw InvalidField("unsupported extension degree " + std::to_string(m));
  }
}

bool Packet::is_zero() const {
  for (Elem e : header)
    if (e != 0) return false;
  for (Elem e : payload)
    if (e != 0) return false;
  return true;
}

Packet zero_packet(std::size_t k, std::size_t l) {
  return Packet{std::vector<Elem>(k, 0), std::vector<Elem>(l, 0)};
}

Packet unit_packet(std::size_t k, std::size_t i, std::span<const Elem> message) {
  if (i >= k) throw DimensionMismatch("unit vector index out of range");
  Packet p{std::vector<Elem>(k, 0), std::vector<Elem>(message.begin(), message.end())};
  p.header[i] = 1;
  return p;
}

void axpy(const Field& field, Elem c, const Packet& x, Packet& y) {
  if (x.header.size() != y.header.size() || x.payload.size() != y.payload.size())
    throw DimensionMismatch("packet shapes differ");
  if (c == 0) return;
  for (std::size_t i = 0; i < x.header.size(); ++i) y.header[i] ^= field.mul(c, x.header[i]);
  for (std::size_t i = 0; i < x.payload.size(); ++i) y.payload[i] ^= field.mul(c, x.payload[i]);
}

Packet linear_combination(const Field& field, std::span<const Elem> coeffs,
                          std::span<const Packet> vectors, std::size_t k, std::size_t l) {
  if (coeffs.size() != vectors.size()) throw DimensionMismatch("coefficient count differs from vector count");
  Packet out = zero_packet(k, l);
  for (std::size_t i = 0; i < vectors.size(); ++i) axpy(field, coeffs[i], vectors[i], out);
  return out;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<Elem>>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols()) throw DimensionMismatch("ragged matrix rows");
    for (std::size_t c = 0; c < m.cols(); ++c) m.at(r, c) = rows[r][c];
  }
  return m;
}

void Matrix::swap_rows(std::size_t a, std::size_t b) {
  if (a == b) return;
  for (std::size_t c = 0; c < cols_; ++c) std::swap(at(a, c), at(b, c));
}

Matrix multiply(const Field& field, const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("matrix product shape mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t t = 0; t < a.cols(); ++t) {
      const Elem x = a.at(i, t);
      if (x == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out.at(i, j) ^= field.mul(x, b.at(t, j));
    }
  return out;
}

std::size_t reduce_rref(const Field& field, Matrix& m, std::size_t pivot_cols) {
  std::size_t pivot_row = 0;
  for (std::size_t c = 0; c < pivot_cols && c < m.cols() && pivot_row < m.rows(); ++c) {
    std::size_t sel = pivot_row;
    while (sel < m.rows() && m.at(sel, c) == 0) ++sel;
    if (sel == m.rows()) continue;
    m.swap_rows(sel, pivot_row);

    const Elem scale = field.inv(m.at(pivot_row, c));
    for (Elem& e : m.row(pivot_row)) e = field.mul(e, scale);

    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (r == pivot_row) continue;
      const Elem f = m.at(r, c);
      if (f == 0) continue;
      for (std::size_t j = c; j < m.cols(); ++j) m.at(r, j) ^= field.mul(f, m.at(pivot_row, j));
    }
    ++pivot_row;
  }
  return pivot_row;
}

std::size_t rank(const Field& field, Matrix m) { return reduce_rref(field, m, m.cols()); }

Matrix header_matrix(std::span<const Packet> packets, std::size_t k) {
  Matrix m(packets.size(), k);
  for (std::size_t r = 0; r < packets.size(); ++r) {
    if (packets[r].header.size() != k) throw DimensionMismatch("header length differs from k");
    for (std::size_t c = 0; c < k; ++c) m.at(r, c) = packets[r].header[c];
  }
  return m;
}

std::size_t header_rank(const Field& field, std::span<const Packet> packets, std::size_t k) {
  return rank(field, header_matrix(packets, k));
}

DecodeResult decode(const Field& field, std::span<const Packet> packets, std::size_t k) {
  if (packets.empty()) return {};
  const std::size_t l = packets.front().payload.size();
  for (const Packet& p : packets)
    if (p.header.size() != k || p.payload.size() != l) throw DimensionMismatch("packets disagree on (k, l)");

  Matrix m(packets.size(), k + l);
  for (std::size_t r = 0; r < packets.size(); ++r) {
    for (std::size_t c = 0; c < k; ++c) m.at(r, c) = packets[r].header[c];
    for (std::size_t c = 0; c < l; ++c) m.at(r, k + c) = packets[r].payload[c];
  }
  DecodeResult result;
  result.rank = reduce_rref(field, m, k);
  if (result.rank < k) return result;

  // Full rank in the header block: row i of the RREF is (e_i | m_i).
  std::vector<std::vector<Elem>> messages(k);
  for (std::size_t i = 0; i < k; ++i) messages[i].assign(m.row(i).begin() + static_cast<std::ptrdiff_t>(k), m.row(i).end());
  result.messages = std::move(messages);
  return result;
}

bool is_consistent(const Field& field, const Packet& p, const Matrix& messages) {
  if (p.header.size() != messages.rows() || p.payload.size() != messages.cols()) return false;
  for (std::size_t c = 0; c < messages.cols(); ++c) {
    Elem acc = 0;
    for (std::size_t r = 0; r < messages.rows(); ++r) acc ^= field.mul(p.header[r], messages.at(r, c));
    if (acc != p.payload[c]) return false;
  }
  return true;
}

bool in_span(const Field& field, std::span<const Packet> basis, const Packet& p, std::size_t k) {
  const std::size_t before = header_rank(field, basis, k);
  std::vector<Packet> extended(basis.begin(), basis.end());
  extended.push_back(p);
  return header_rank(field, extended, k) == before;
}

}  // namespace pnclab::gf
