#pragma once

// Reference implementations used only by the tests. They are deliberately
// slow and share no code with the library.

#include <cstdint>
#include <limits>
#include <vector>

#include "pnclab/flow.hpp"
#include "pnclab/gf.hpp"
#include "pnclab/schedule.hpp"

namespace oracle {

// Schoolbook polynomial product over GF(2) followed by long division.
inline std::uint32_t gf_mul(std::uint32_t a, std::uint32_t b, std::uint32_t modulus, unsigned m) {
  std::uint64_t product = 0;
  for (unsigned i = 0; i < 32; ++i)
    if ((b >> i) & 1u) product ^= static_cast<std::uint64_t>(a) << i;
  for (int bit = 63; bit >= static_cast<int>(m); --bit)
    if ((product >> bit) & 1u) product ^= static_cast<std::uint64_t>(modulus) << (bit - static_cast<int>(m));
  return static_cast<std::uint32_t>(product);
}

// a^(q-2) by repeated multiplication.
inline std::uint32_t gf_inv(std::uint32_t a, std::uint32_t modulus, unsigned m) {
  std::uint32_t r = 1;
  const std::uint64_t e = (std::uint64_t{1} << m) - 2;
  std::uint32_t base = a;
  for (std::uint64_t k = e; k; k >>= 1) {
    if (k & 1u) r = gf_mul(r, base, modulus, m);
    base = gf_mul(base, base, modulus, m);
  }
  return r;
}

// Rank by plain row echelon elimination with oracle arithmetic.
inline std::size_t rank(std::vector<std::vector<std::uint32_t>> rows, std::uint32_t modulus, unsigned m) {
  std::size_t r = 0;
  const std::size_t cols = rows.empty() ? 0 : rows[0].size();
  for (std::size_t c = 0; c < cols && r < rows.size(); ++c) {
    std::size_t p = r;
    while (p < rows.size() && rows[p][c] == 0) ++p;
    if (p == rows.size()) continue;
    std::swap(rows[p], rows[r]);
    const std::uint32_t inv = gf_inv(rows[r][c], modulus, m);
    for (std::size_t i = r + 1; i < rows.size(); ++i) {
      const std::uint32_t f = gf_mul(rows[i][c], inv, modulus, m);
      for (std::size_t j = c; j < cols; ++j) rows[i][j] ^= gf_mul(f, rows[r][j], modulus, m);
    }
    ++r;
  }
  return r;
}

// Minimum over all s-t vertex bipartitions of the capacity leaving the source side.
inline std::int64_t cut_by_enumeration(const pnclab::FlowNetwork& net, std::uint32_t s, std::uint32_t t) {
  const std::size_t nv = net.vertex_count();
  std::vector<std::uint32_t> free;
  for (std::uint32_t v = 0; v < nv; ++v)
    if (v != s && v != t) free.push_back(v);
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  std::vector<bool> side(nv, false);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << free.size()); ++mask) {
    std::fill(side.begin(), side.end(), false);
    side[s] = true;
    for (std::size_t i = 0; i < free.size(); ++i) side[free[i]] = (mask >> i) & 1u;
    std::int64_t cut = 0;
    for (const pnclab::Arc& a : net.arcs())
      if (side[a.from] && !side[a.to]) cut += a.capacity;
    best = std::min(best, cut);
  }
  return best;
}

// Two nodes; both messages start at node 0; node 0 sends to node 1 at
// ticks 1..sends with delay 1.
inline pnclab::Schedule two_node_line(std::size_t sends) {
  pnclab::Schedule s;
  s.n = 2;
  s.k = 2;
  s.l = 1;
  for (pnclab::MessageId m = 0; m < 2; ++m) s.events.push_back(pnclab::GenerateEvent{m, {{0, 0}}});
  for (std::size_t t = 1; t <= sends; ++t)
    s.events.push_back(pnclab::TransmitEvent{0, static_cast<pnclab::Tick>(t), {{1, 1}}});
  return s;
}

inline pnclab::Schedule three_send_line() { return two_node_line(3); }
inline pnclab::Schedule two_send_line() { return two_node_line(2); }

}  // namespace oracle
