#include "sympatch/assembly.hpp"

#include <algorithm>
#include <limits>

#include "sympatch/parallel.hpp"

namespace sympatch {

std::string to_string(Formulation f) { return f == Formulation::Conventional ? "conventional" : "amplitude"; }

Formulation formulation_from_string(const std::string& s) {
  if (s == "conventional") return Formulation::Conventional;
  if (s == "amplitude") return Formulation::Amplitude;
  throw ConfigError("unknown formulation '" + s + "'");
}

const Material& MaterialTable::operator()(int region) const {
  static const Material vacuum;
  if (region >= 0 && region < int(by_region.size())) return by_region[region];
  return vacuum;
}

namespace {

using CRow = Eigen::Matrix<cplx, 3, 1>;

// Shape data at one quadrature point, with the amplitude substitution already applied:
// test functions carry r e^{ikr}, trial functions e^{-ikr}/r, and the two factors cancel in
// every bilinear term. tg/sg are the effective test/trial gradients.
struct PointData {
  std::vector<double> N;
  std::vector<CRow> tg, sg;
  cplx g = 1.0;  // test-function factor, needed for loads
  double w = 0.0;
  Vec3 x;
};

// Radial factor a = (1/r + ik) rhat, so that grad(f N) = f (grad N - a N) and grad(g N) = g (grad N + a N).
CRow amplitude_factor(const Vec3& x, double k) {
  const double r = x.norm();
  if (!(r > 0.0)) throw DomainError("amplitude formulation evaluated at the origin");
  return (cplx(1.0 / r, k) * (x / r).cast<cplx>()).eval();
}

void fill_point(PointData& pd, const std::vector<Vec3>& grads, const double* values, int n, const Vec3& x,
                const HarmonicParams& p) {
  pd.N.assign(values, values + n);
  pd.tg.resize(n);
  pd.sg.resize(n);
  pd.x = x;
  if (p.formulation == Formulation::Amplitude) {
    const CRow a = amplitude_factor(x, p.k0);
    pd.g = x.norm() * std::exp(cplx(0.0, p.k0 * x.norm()));
    for (int i = 0; i < n; ++i) {
      pd.tg[i] = grads[i].cast<cplx>() + a * pd.N[i];
      pd.sg[i] = grads[i].cast<cplx>() - a * pd.N[i];
    }
  } else {
    pd.g = 1.0;
    for (int i = 0; i < n; ++i) pd.tg[i] = pd.sg[i] = grads[i].cast<cplx>();
  }
}

}  // namespace

ElementContribution<cplx> element_harmonic(const ElementGeometry& geom, const Material& mat, const HarmonicParams& p,
                                           const HarmonicLoad& load) {
  const int n = int(geom.nodes.size());
  const auto& tab = tabulate(geom.kind, p.quad_order);
  const auto& rule = *tab.rule;
  const double nu = 1.0 / mat.mu_r();
  const double mass = p.k0 * p.k0 * mat.eps_r();
  if (p.formulation == Formulation::Amplitude) {
    double rmin = std::numeric_limits<double>::infinity(), size = 0.0;
    for (const auto& x : geom.nodes) {
      rmin = std::min(rmin, x.norm());
      size = std::max(size, (x - geom.nodes.front()).norm());
    }
    if (rmin <= 1e-9 * size)
      throw DomainError("amplitude formulation on element " + std::to_string(geom.id) + " touching the origin");
  }
  ElementContribution<cplx> out;
  out.K = Eigen::MatrixXcd::Zero(4 * n, 4 * n);
  if (!load.empty()) out.f = Eigen::VectorXcd::Zero(4 * n);

  std::vector<Vec3> grads(n);
  PointData pd;
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    Vec3 x;
    Mat3 J;
    double detJ;
    map_physical(geom, std::span<const double>(&tab.values[q * n], n),
                 std::span<const Vec3>(&tab.ref_grads[q * n], n), x, J, detJ, grads);
    fill_point(pd, grads, &tab.values[q * n], n, x, p);
    const double w = rule.weights[q] * detJ;
    for (int i = 0; i < n; ++i) {
      const CRow& tg = pd.tg[i];
      const double tv = pd.N[i];
      for (int j = 0; j < n; ++j) {
        const CRow& sg = pd.sg[j];
        const double sv = pd.N[j];
        const cplx dot = tg.cwiseProduct(sg).sum();
        auto blk = out.K.block<4, 4>(4 * i, 4 * j);
        for (int c = 0; c < 3; ++c) {
          for (int d = 0; d < 3; ++d) {
            cplx v = nu * (p.alpha * tg[c] * sg[d] - tg[d] * sg[c]);
            if (c == d) v += nu * dot - mass * tv * sv;
            blk(c, d) += w * v;
          }
          blk(c, 3) += -w * mass * tv * sg[c];
          blk(3, c) += -w * mass * tg[c] * sv;
        }
        blk(3, 3) += -w * mass * dot;
      }
    }
    if (!load.empty()) {
      const cplx gw = pd.g * w;
      CRow Jx = CRow::Zero();
      cplx qx = 0.0;
      if (load.field) Jx = load.field(x, mat);
      if (load.scalar) qx = load.scalar(x, mat);
      for (int i = 0; i < n; ++i) {
        for (int c = 0; c < 3; ++c) out.f[4 * i + c] += gw * pd.N[i] * Jx[c];
        out.f[4 * i + 3] += gw * (pd.tg[i].cwiseProduct(Jx).sum() + pd.N[i] * qx);
      }
    }
  }
  return out;
}

namespace {

// Tangential face mass coupling (W + grad phi)_t against (W + grad phi)_t, scaled by `scale`.
template <class S, class Grad>
void accumulate_tangential(Eigen::Matrix<S, -1, -1>& B, const ElementGeometry& geom, int face, int order,
                           const Grad& grads_at, S scale) {
  const int n = int(geom.nodes.size());
  const auto& fq = face_quadrature(geom.kind, face, order);
  const auto& fn = face_nodes(geom.kind, face);
  using Row = Eigen::Matrix<S, 3, 1>;
  std::vector<Row> tg(n), sg(n);
  std::vector<double> N(n);
  for (std::size_t q = 0; q < fq.points.size(); ++q) {
    const FacePoint fp = map_face(geom, face, fq.points[q][0], fq.points[q][1]);
    const Vec3 xi = face_to_reference(geom.kind, face, fq.points[q][0], fq.points[q][1]);
    shape_values(geom.kind, xi, N);
    grads_at(fp, N, tg, sg);
    const Mat3 P = Mat3::Identity() - fp.normal * fp.normal.transpose();
    const S w = scale * (fq.weights[q] * fp.dA);
    // Only face nodes have non-vanishing values, but interior-node gradients still reach the face.
    for (int i = 0; i < n; ++i) {
      const Row Ptg = P.cast<S>() * tg[i];
      const bool iface = std::find(fn.begin(), fn.end(), i) != fn.end();
      for (int j = 0; j < n; ++j) {
        const bool jface = std::find(fn.begin(), fn.end(), j) != fn.end();
        auto blk = B.template block<4, 4>(4 * i, 4 * j);
        const Row Psg = P.cast<S>() * sg[j];
        if (iface && jface) blk.template topLeftCorner<3, 3>() += (w * N[i] * N[j]) * P.cast<S>();
        for (int c = 0; c < 3; ++c) {
          if (iface) blk(c, 3) += w * N[i] * Psg[c];
          if (jface) blk(3, c) += w * Ptg[c] * N[j];
        }
        blk(3, 3) += w * tg[i].cwiseProduct(Psg).sum();
      }
    }
  }
}

}  // namespace

Eigen::MatrixXcd element_abc(const ElementGeometry& geom, int face, const Material& mat, const HarmonicParams& p) {
  const int n = int(geom.nodes.size());
  Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(4 * n, 4 * n);
  const double k = p.k0 * mat.index();
  if (k == 0.0) return B;
  auto grads = [&](const FacePoint& fp, const std::vector<double>& N, std::vector<CRow>& tg, std::vector<CRow>& sg) {
    if (p.formulation == Formulation::Amplitude) {
      const CRow a = amplitude_factor(fp.x, p.k0);
      for (int i = 0; i < n; ++i) {
        tg[i] = fp.vol.grads[i].cast<cplx>() + a * N[i];
        sg[i] = fp.vol.grads[i].cast<cplx>() - a * N[i];
      }
    } else {
      for (int i = 0; i < n; ++i) tg[i] = sg[i] = fp.vol.grads[i].cast<cplx>();
    }
  };
  accumulate_tangential<cplx>(B, geom, face, p.quad_order, grads, cplx(0.0, k / mat.mu_r()));
  return B;
}

HarmonicLoad dielectric_contrast_load(const HarmonicWaveSpec& wave) {
  HarmonicLoad load;
  load.field = [wave](const Vec3& x, const Material& m) -> CVec3 {
    if (m.eps_r() == 1.0 && m.mu_r() == 1.0) return CVec3::Zero();
    if (m.mu_r() != 1.0) throw DomainError("dielectric scattering source requires mu_r = 1 inside the scatterer");
    return wave.k0 * wave.k0 * (m.eps_r() - 1.0) * plane_wave_field(wave, x);
  };
  return load;
}

TransientElement element_transient(const ElementGeometry& geom, const Material& mat, const TransientParams& p) {
  const int n = int(geom.nodes.size());
  const auto& tab = tabulate(geom.kind, p.quad_order);
  const auto& rule = *tab.rule;
  const double nu = 1.0 / mat.mu_r();
  const double m = mat.eps_r() / (p.c * p.c);
  TransientElement out{Eigen::MatrixXd::Zero(4 * n, 4 * n), Eigen::MatrixXd::Zero(4 * n, 4 * n)};
  std::vector<Vec3> G(n);
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    Vec3 x;
    Mat3 J;
    double detJ;
    const double* N = &tab.values[q * n];
    map_physical(geom, std::span<const double>(N, n), std::span<const Vec3>(&tab.ref_grads[q * n], n), x, J, detJ,
                 G);
    const double w = rule.weights[q] * detJ;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double dot = G[i].dot(G[j]);
        auto M = out.M.block<4, 4>(4 * i, 4 * j);
        auto K = out.K.block<4, 4>(4 * i, 4 * j);
        for (int c = 0; c < 3; ++c) {
          M(c, c) += w * m * N[i] * N[j];
          M(c, 3) += w * m * N[i] * G[j][c];
          M(3, c) += w * m * G[i][c] * N[j];
          for (int d = 0; d < 3; ++d) K(c, d) += w * nu * (p.alpha * G[i][c] * G[j][d] - G[i][d] * G[j][c]);
          K(c, c) += w * nu * dot;
        }
        M(3, 3) += w * m * dot;
      }
  }
  return out;
}

Eigen::MatrixXd element_transient_abc(const ElementGeometry& geom, int face, const Material& mat,
                                      const TransientParams& p) {
  const int n = int(geom.nodes.size());
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(4 * n, 4 * n);
  auto grads = [&](const FacePoint& fp, const std::vector<double>&, std::vector<Vec3>& tg, std::vector<Vec3>& sg) {
    for (int i = 0; i < n; ++i) tg[i] = sg[i] = fp.vol.grads[i];
  };
  // Outgoing waves in the medium travel at c / index.
  accumulate_tangential<double>(B, geom, face, p.quad_order, grads, mat.index() / (mat.mu_r() * p.c));
  return B;
}

Eigen::VectorXd element_transient_load(const ElementGeometry& geom, const Material& mat,
                                       const std::function<Vec3(const Vec3&, const Material&)>& Jf, int quad_order) {
  const int n = int(geom.nodes.size());
  const auto& tab = tabulate(geom.kind, quad_order);
  const auto& rule = *tab.rule;
  Eigen::VectorXd f = Eigen::VectorXd::Zero(4 * n);
  std::vector<Vec3> G(n);
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    Vec3 x;
    Mat3 J;
    double detJ;
    const double* N = &tab.values[q * n];
    map_physical(geom, std::span<const double>(N, n), std::span<const Vec3>(&tab.ref_grads[q * n], n), x, J, detJ,
                 G);
    const Vec3 s = Jf(x, mat) * (rule.weights[q] * detJ);
    for (int i = 0; i < n; ++i) {
      f.segment<3>(4 * i) += N[i] * s;
      f[4 * i + 3] += G[i].dot(s);
    }
  }
  return f;
}

std::vector<std::vector<int>> facets_by_element(const Mesh& mesh, BoundaryKind kind) {
  std::vector<std::vector<int>> out(mesh.elements.size());
  for (const auto& f : mesh.facets)
    if (f.tag.kind == kind) out[f.element].push_back(f.face);
  return out;
}

template <class S>
ReducedOperator<S> assemble_global(const Mesh& mesh, const DofMap& dofs,
                                   const std::function<ElementContribution<S>(int)>& element, Vector<S>* load) {
  if (dofs.node_count() != int(mesh.nodes.size()))
    throw DomainError("dof map built for " + std::to_string(dofs.node_count()) + " nodes, mesh has " +
                      std::to_string(mesh.nodes.size()));
  const int ne = int(mesh.elements.size());
  const int nf = dofs.free_count(), nc = dofs.constrained_count();

  struct Buffer {
    Triplets<S> ff, fc;
    std::vector<std::pair<int, S>> f;
  };
  std::vector<Buffer> buffers(std::max(1, thread_count()));
  parallel_chunks(ne, [&](int begin, int end, int worker) {
    Buffer& buf = buffers[worker];
    for (int e = begin; e < end; ++e) {
      const auto& conn = mesh.elements[e].conn;
      const int n = int(conn.size());
      ElementContribution<S> ec = element(e);
      const bool has_matrix = ec.K.size() != 0;
      if (has_matrix && (ec.K.rows() != 4 * n || ec.K.cols() != 4 * n))
        throw DomainError("element block has the wrong dimension");
      if (ec.f.size() != 0 && ec.f.size() != 4 * n) throw DomainError("element load has the wrong dimension");
      // Rotate into node frames: K <- T^T K T, f <- T^T f with T = blockdiag(R, 1).
      Eigen::Matrix<S, -1, -1> T = Eigen::Matrix<S, -1, -1>::Identity(4 * n, 4 * n);
      bool any = false;
      for (int i = 0; i < n; ++i)
        if (dofs.rotated(conn[i])) {
          T.template block<3, 3>(4 * i, 4 * i) = dofs.frame(conn[i]).template cast<S>();
          any = true;
        }
      if (any) {
        if (has_matrix) ec.K = (T.transpose() * ec.K * T).eval();
        if (ec.f.size()) ec.f = (T.transpose() * ec.f).eval();
      }
      std::vector<int> map(4 * n);
      for (int i = 0; i < n; ++i)
        for (int s = 0; s < 4; ++s) map[4 * i + s] = dofs.slot(conn[i], s);
      for (int r = 0; r < 4 * n; ++r) {
        const int gr = map[r];
        if (gr < 0) continue;
        for (int c = 0; c < 4 * n && has_matrix; ++c) {
          const S v = ec.K(r, c);
          if (v == S(0)) continue;
          const int gc = map[c];
          if (gc >= 0)
            buf.ff.emplace_back(gr, gc, v);
          else
            buf.fc.emplace_back(gr, -gc - 1, v);
        }
        if (ec.f.size() && ec.f[r] != S(0)) buf.f.emplace_back(gr, ec.f[r]);
      }
    }
  });

  Triplets<S> ff, fc;
  if (load) *load = Vector<S>::Zero(nf);
  for (auto& b : buffers) {
    ff.insert(ff.end(), b.ff.begin(), b.ff.end());
    fc.insert(fc.end(), b.fc.begin(), b.fc.end());
    if (load)
      for (auto& [r, v] : b.f) (*load)[r] += v;
    b = Buffer{};
  }
  ReducedOperator<S> op;
  op.ff = assemble_from_triplets(nf, ff);
  op.fc.resize(nf, nc);
  op.fc.setFromTriplets(fc.begin(), fc.end());
  op.fc.makeCompressed();
  return op;
}

template ReducedOperator<double> assemble_global<double>(const Mesh&, const DofMap&,
                                                         const std::function<ElementContribution<double>(int)>&,
                                                         Vector<double>*);
template ReducedOperator<cplx> assemble_global<cplx>(const Mesh&, const DofMap&,
                                                     const std::function<ElementContribution<cplx>(int)>&,
                                                     Vector<cplx>*);

HarmonicBlocks assemble_harmonic(const Mesh& mesh, const DofMap& dofs, const MaterialTable& materials,
                                 const HarmonicParams& p, const HarmonicLoad& load,
                                 const Vector<cplx>& constrained_values) {
  if (constrained_values.size() != dofs.constrained_count())
    throw DomainError("constrained value vector has the wrong size");
  const auto abc = facets_by_element(mesh, BoundaryKind::ABC);
  HarmonicBlocks out;
  out.op = assemble_global<cplx>(
      mesh, dofs,
      [&](int e) {
        const ElementGeometry geom = mesh.geometry(e);
        const Material& mat = materials(mesh.elements[e].region);
        auto ec = element_harmonic(geom, mat, p, load);
        for (int face : abc[e]) ec.K += element_abc(geom, face, mat, p);
        return ec;
      },
      &out.load);
  out.rhs = out.load - out.op.fc * constrained_values;
  return out;
}

TransientBlocks assemble_transient(const Mesh& mesh, const DofMap& dofs, const MaterialTable& materials,
                                   const TransientParams& p) {
  const auto abc = facets_by_element(mesh, BoundaryKind::ABC);
  TransientBlocks out;
  // Mass and stiffness come out of the same element pass; the stiffness is cached per element
  // to avoid a second pass over the quadrature.
  std::vector<Eigen::MatrixXd> stiffness(mesh.elements.size());
  out.M = assemble_global<double>(mesh, dofs, [&](int e) {
    const ElementGeometry geom = mesh.geometry(e);
    auto te = element_transient(geom, materials(mesh.elements[e].region), p);
    stiffness[e] = std::move(te.K);
    return ElementContribution<double>{std::move(te.M), {}};
  });
  out.K = assemble_global<double>(mesh, dofs, [&](int e) {
    ElementContribution<double> ec{std::move(stiffness[e]), {}};
    stiffness[e] = Eigen::MatrixXd();
    return ec;
  });
  out.C = assemble_global<double>(mesh, dofs, [&](int e) {
    const ElementGeometry geom = mesh.geometry(e);
    const int n = int(geom.nodes.size());
    ElementContribution<double> ec{Eigen::MatrixXd::Zero(4 * n, 4 * n), {}};
    for (int face : abc[e]) ec.K += element_transient_abc(geom, face, materials(mesh.elements[e].region), p);
    return ec;
  });
  return out;
}

Vector<double> transient_load(const Mesh& mesh, const DofMap& dofs, const MaterialTable& materials,
                              const std::function<Vec3(const Vec3&, const Material&)>& J, int quad_order,
                              const std::function<bool(const Material&)>& active) {
  Vector<double> load;
  assemble_global<double>(
      mesh, dofs,
      [&](int e) {
        const ElementGeometry geom = mesh.geometry(e);
        const int n = int(geom.nodes.size());
        const Material& mat = materials(mesh.elements[e].region);
        ElementContribution<double> ec;
        ec.f = (!active || active(mat)) ? element_transient_load(geom, mat, J, quad_order)
                                        : Eigen::VectorXd::Zero(4 * n);
        return ec;
      },
      &load);
  return load;
}

}  // namespace sympatch
