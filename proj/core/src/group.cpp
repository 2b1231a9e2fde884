#include "vfl/group.hpp"

#include <algorithm>
#include <atomic>

#include "vfl/errors.hpp"
#include "vfl/parallel.hpp"

namespace vfl {

namespace {

std::atomic<bool> g_subgroup_checks{true};

const std::uint8_t* bytes_of(std::string_view s) { return reinterpret_cast<const std::uint8_t*>(s.data()); }

}  // namespace

// ---- G1 -------------------------------------------------------------------

G1::G1(const blst_p1_affine& a) { blst_p1_from_affine(&p_, &a); }

G1 G1::generator() { return G1(*blst_p1_generator()); }

G1 G1::hash(ByteView msg, std::string_view dst) {
  G1 out;
  blst_hash_to_g1(&out.p_, msg.data(), msg.size(), bytes_of(dst), dst.size(), nullptr, 0);
  return out;
}

G1 G1::operator+(const G1& o) const {
  G1 out;
  blst_p1_add_or_double(&out.p_, &p_, &o.p_);
  return out;
}

G1 G1::operator-() const {
  G1 out = *this;
  blst_p1_cneg(&out.p_, true);
  return out;
}

G1 G1::operator-(const G1& o) const { return *this + (-o); }

G1& G1::operator+=(const G1& o) {
  blst_p1_add_or_double(&p_, &p_, &o.p_);
  return *this;
}

G1 G1::operator*(const FieldScalar& k) const {
  const blst_scalar s = k.to_blst_scalar();
  G1 out;
  blst_p1_mult(&out.p_, &p_, s.b, 255);
  return out;
}

G1 G1::mul_bits(ByteView scalar_le, std::size_t nbits) const {
  if (scalar_le.size() * 8 < nbits) throw InvalidArgument("scalar shorter than bit count");
  G1 out;
  blst_p1_mult(&out.p_, &p_, scalar_le.data(), nbits);
  return out;
}

bool G1::is_identity() const { return blst_p1_is_inf(&p_); }
bool G1::in_group() const { return blst_p1_in_g1(&p_); }
bool operator==(const G1& a, const G1& b) { return blst_p1_is_equal(&a.p_, &b.p_); }

blst_p1_affine G1::to_affine() const {
  blst_p1_affine a;
  blst_p1_to_affine(&a, &p_);
  return a;
}

G1::Compressed G1::compress() const {
  Compressed out{};
  blst_p1_compress(out.data(), &p_);
  return out;
}

G1 G1::decompress(ByteView bytes) {
  if (bytes.size() != kCompressedBytes) throw DeserializationError("G1 point must be 48 bytes");
  blst_p1_affine a;
  if (blst_p1_uncompress(&a, bytes.data()) != BLST_SUCCESS) {
    throw DeserializationError("invalid G1 encoding");
  }
  if (g_subgroup_checks.load(std::memory_order_relaxed) && !blst_p1_affine_in_g1(&a)) {
    throw DeserializationError("G1 point outside the prime-order subgroup");
  }
  return G1(a);
}

// ---- G2 -------------------------------------------------------------------

G2::G2(const blst_p2_affine& a) { blst_p2_from_affine(&p_, &a); }

G2 G2::generator() { return G2(*blst_p2_generator()); }

G2 G2::operator+(const G2& o) const {
  G2 out;
  blst_p2_add_or_double(&out.p_, &p_, &o.p_);
  return out;
}

G2& G2::operator+=(const G2& o) {
  blst_p2_add_or_double(&p_, &p_, &o.p_);
  return *this;
}

G2 G2::operator-() const {
  G2 out = *this;
  blst_p2_cneg(&out.p_, true);
  return out;
}

G2 G2::operator*(const FieldScalar& k) const {
  const blst_scalar s = k.to_blst_scalar();
  G2 out;
  blst_p2_mult(&out.p_, &p_, s.b, 255);
  return out;
}

bool G2::is_identity() const { return blst_p2_is_inf(&p_); }
bool G2::in_group() const { return blst_p2_in_g2(&p_); }
bool operator==(const G2& a, const G2& b) { return blst_p2_is_equal(&a.p_, &b.p_); }

blst_p2_affine G2::to_affine() const {
  blst_p2_affine a;
  blst_p2_to_affine(&a, &p_);
  return a;
}

G2::Compressed G2::compress() const {
  Compressed out{};
  blst_p2_compress(out.data(), &p_);
  return out;
}

G2 G2::decompress(ByteView bytes) {
  if (bytes.size() != kCompressedBytes) throw DeserializationError("G2 point must be 96 bytes");
  blst_p2_affine a;
  if (blst_p2_uncompress(&a, bytes.data()) != BLST_SUCCESS) {
    throw DeserializationError("invalid G2 encoding");
  }
  if (g_subgroup_checks.load(std::memory_order_relaxed) && !blst_p2_affine_in_g2(&a)) {
    throw DeserializationError("G2 point outside the prime-order subgroup");
  }
  return G2(a);
}

// ---- pairings -------------------------------------------------------------

GT pairing(const G1& p, const G2& q) {
  const blst_p1_affine pa = p.to_affine();
  const blst_p2_affine qa = q.to_affine();
  blst_fp12 ml;
  blst_miller_loop(&ml, &qa, &pa);
  blst_fp12 out;
  blst_final_exp(&out, &ml);
  return GT(out);
}

bool pairing_product_is_one(std::span<const G1> ps, std::span<const G2> qs) {
  if (ps.size() != qs.size()) throw DimensionError("pairing product needs matching operand counts");
  std::vector<blst_p1_affine> pa;
  std::vector<blst_p2_affine> qa;
  pa.reserve(ps.size());
  qa.reserve(qs.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    // e(O, Q) = e(P, O) = 1; the Miller loop is not defined at infinity.
    if (ps[i].is_identity() || qs[i].is_identity()) continue;
    pa.push_back(ps[i].to_affine());
    qa.push_back(qs[i].to_affine());
  }
  if (pa.empty()) return true;
  std::vector<const blst_p1_affine*> pp;
  std::vector<const blst_p2_affine*> qp;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    pp.push_back(&pa[i]);
    qp.push_back(&qa[i]);
  }
  blst_fp12 ml;
  blst_miller_loop_n(&ml, qp.data(), pp.data(), pa.size());
  blst_fp12 out;
  blst_final_exp(&out, &ml);
  return blst_fp12_is_one(&out);
}

// ---- multi-scalar multiplication -----------------------------------------

G1Bases::G1Bases(std::span<const G1> points) : affine_(points.size()) {
  std::vector<const blst_p1*> ptrs(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) ptrs[i] = &points[i].raw();
  if (!points.empty()) blst_p1s_to_affine(affine_.data(), ptrs.data(), points.size());
}

G1Bases G1Bases::prefix(std::size_t n) const {
  if (n > affine_.size()) throw DimensionError("prefix longer than base table");
  G1Bases out;
  out.affine_.assign(affine_.begin(), affine_.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

namespace {

G1 msm_range(const G1Bases& bases, std::size_t offset, std::span<const FieldScalar> scalars) {
  const std::size_t n = scalars.size();
  if (n == 0) return G1::identity();
  std::vector<blst_scalar> packed(n);
  for (std::size_t i = 0; i < n; ++i) packed[i] = scalars[i].to_blst_scalar();
  if (n == 1) {
    G1 base(bases[offset]);
    return base.mul_bits(ByteView(packed[0].b, 32), 255);
  }
  // Contiguous arrays are passed as {ptr, nullptr}.
  const blst_p1_affine* points[2] = {&bases[offset], nullptr};
  const std::uint8_t* scalar_ptrs[2] = {packed[0].b, nullptr};
  std::vector<limb_t> scratch(blst_p1s_mult_pippenger_scratch_sizeof(n) / sizeof(limb_t) + 1);
  blst_p1 out;
  blst_p1s_mult_pippenger(&out, points, n, scalar_ptrs, 255, scratch.data());
  return G1(out);
}

}  // namespace

G1 msm(const G1Bases& bases, std::size_t offset, std::span<const FieldScalar> scalars,
       std::size_t partitions, std::size_t workers) {
  if (offset > bases.size() || scalars.size() > bases.size() - offset) {
    throw DimensionError("multi-scalar multiplication range exceeds base table");
  }
  const std::size_t n = scalars.size();
  partitions = std::clamp<std::size_t>(partitions, 1, std::max<std::size_t>(n, 1));
  if (partitions == 1) return msm_range(bases, offset, scalars);

  std::vector<G1> partial(partitions);
  const std::size_t chunk = n / partitions;
  const std::size_t extra = n % partitions;
  std::vector<std::size_t> starts(partitions + 1, 0);
  for (std::size_t k = 0; k < partitions; ++k) starts[k + 1] = starts[k] + chunk + (k < extra ? 1 : 0);
  parallel_for(partitions, workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      partial[k] = msm_range(bases, offset + starts[k], scalars.subspan(starts[k], starts[k + 1] - starts[k]));
    }
  });
  G1 acc;
  for (const auto& p : partial) acc += p;
  return acc;
}

// ---- test hooks -----------------------------------------------------------

namespace testing {

void set_subgroup_checks(bool enabled) { g_subgroup_checks.store(enabled); }
bool subgroup_checks_enabled() { return g_subgroup_checks.load(); }

G1::Compressed off_subgroup_g1_point() {
  // y^2 = x^3 + 4 over F_q. Walk x = 1, 2, ... until the right-hand side is a
  // square; the cofactor is ~2^126, so such a point is almost never in G1.
  blst_fp four;
  const std::uint64_t four_limbs[6] = {4, 0, 0, 0, 0, 0};
  blst_fp_from_uint64(&four, four_limbs);
  for (std::uint64_t xi = 1;; ++xi) {
    const std::uint64_t x_limbs[6] = {xi, 0, 0, 0, 0, 0};
    blst_p1_affine a;
    blst_fp_from_uint64(&a.x, x_limbs);
    blst_fp rhs;
    blst_fp_sqr(&rhs, &a.x);
    blst_fp_mul(&rhs, &rhs, &a.x);
    blst_fp_add(&rhs, &rhs, &four);
    if (!blst_fp_sqrt(&a.y, &rhs)) continue;
    if (blst_p1_affine_in_g1(&a)) continue;
    G1::Compressed out{};
    blst_p1_affine_compress(out.data(), &a);
    return out;
  }
}

}  // namespace testing

}  // namespace vfl
