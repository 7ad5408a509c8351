#include "cshock/regression.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <numeric>

#include "binio.hpp"
#include "cshock/errors.hpp"

namespace cshock {

std::vector<std::size_t> standard_blocks(std::size_t dims) {
    std::vector<std::size_t> b(dims, 1);
    for (std::size_t d = 0; d < std::min<std::size_t>(dims, 4); ++d) b[d] = 4;
    return b;
}

QuantileMesh QuantileMesh::build(const FeatureMatrix& x, std::vector<std::size_t> blocks) {
    if (blocks.size() != x.dims) throw InvalidInput("quantile mesh: one block count per feature dimension required");
    for (auto b : blocks)
        if (b == 0) throw InvalidInput("quantile mesh: block counts must be >= 1");
    QuantileMesh mesh;
    mesh.blocks_ = std::move(blocks);
    mesh.thresholds_.resize(x.dims);

    std::vector<std::vector<std::size_t>> nodes(1);
    nodes[0].resize(x.rows);
    std::iota(nodes[0].begin(), nodes[0].end(), std::size_t{0});
    for (std::size_t level = 0; level < x.dims; ++level) {
        const std::size_t b = mesh.blocks_[level];
        auto& thr = mesh.thresholds_[level];
        thr.assign(nodes.size() * (b - 1), std::numeric_limits<double>::infinity());
        std::vector<std::vector<std::size_t>> next(nodes.size() * b);
        for (std::size_t node = 0; node < nodes.size(); ++node) {
            auto& idx = nodes[node];
            if (b == 1) {
                next[node] = std::move(idx);
                continue;
            }
            std::stable_sort(idx.begin(), idx.end(),
                             [&](std::size_t a, std::size_t c) { return x.row(a)[level] < x.row(c)[level]; });
            const std::size_t n = idx.size();
            double* t = thr.data() + node * (b - 1);
            for (std::size_t k = 1; k < b; ++k) {
                const std::size_t pos = k * n / b;
                if (pos < n) t[k - 1] = x.row(idx[pos])[level];
            }
            for (std::size_t i : idx) {
                const auto child = static_cast<std::size_t>(std::upper_bound(t, t + (b - 1), x.row(i)[level]) - t);
                next[node * b + child].push_back(i);
            }
        }
        nodes = std::move(next);
    }
    return mesh;
}

std::size_t QuantileMesh::cells() const noexcept {
    std::size_t n = 1;
    for (auto b : blocks_) n *= b;
    return n;
}

std::size_t QuantileMesh::cell_of(const double* x) const {
    std::size_t node = 0;
    for (std::size_t level = 0; level < blocks_.size(); ++level) {
        const std::size_t b = blocks_[level];
        if (b == 1) continue;
        const double* t = thresholds_[level].data() + node * (b - 1);
        const auto child = static_cast<std::size_t>(std::upper_bound(t, t + (b - 1), x[level]) - t);
        node = node * b + child;
    }
    return node;
}

void QuantileMesh::write(std::ostream& out) const {
    binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(blocks_.size()));
    for (auto b : blocks_) binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(b));
    for (const auto& level : thresholds_) {
        binio::put<std::uint64_t>(out, level.size());
        for (double v : level) binio::put(out, v);
    }
}

QuantileMesh QuantileMesh::read(std::istream& in) {
    QuantileMesh mesh;
    const auto dims = binio::get<std::uint32_t>(in, "mesh");
    if (dims > 64) throw InvalidInput("mesh: implausible dimension count");
    for (std::uint32_t d = 0; d < dims; ++d) mesh.blocks_.push_back(binio::get<std::uint32_t>(in, "mesh"));
    std::size_t nodes = 1;
    for (std::uint32_t d = 0; d < dims; ++d) {
        const auto n = binio::get<std::uint64_t>(in, "mesh");
        const std::size_t b = mesh.blocks_[d];
        if (b == 0 || n != nodes * (b - 1)) throw InvalidInput("mesh: inconsistent threshold table");
        std::vector<double> level(n);
        for (auto& v : level) v = binio::get<double>(in, "mesh");
        mesh.thresholds_.push_back(std::move(level));
        nodes *= b;
    }
    return mesh;
}

double CellFit::predict(const double* x) const {
    double v = mean_y;
    for (std::size_t j = 0; j < beta.size(); ++j) v += beta[j] * (x[j] - mean_x[j]);
    return v;
}

CellFit affine_fit(const FeatureMatrix& x, std::span<const double> y, std::span<const std::size_t> indices,
                   bool* singular) {
    const std::size_t d = x.dims;
    const std::size_t n = indices.empty() ? x.rows : indices.size();
    auto at = [&](std::size_t k) { return indices.empty() ? k : indices[k]; };
    CellFit fit;
    if (singular) *singular = false;
    if (n == 0) return fit;
    std::vector<double> mx(d, 0.0);
    double my = 0.0;
    // Running means: identical samples give their value back exactly.
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = at(k);
        const double w = 1.0 / static_cast<double>(k + 1);
        my += (y[i] - my) * w;
        for (std::size_t j = 0; j < d; ++j) mx[j] += (x.row(i)[j] - mx[j]) * w;
    }
    fit.mean_y = my;
    if (d == 0 || n < 2) return fit;

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    Eigen::VectorXd c(static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = at(k);
        for (std::size_t j = 0; j < d; ++j) c[static_cast<Eigen::Index>(j)] = x.row(i)[j] - mx[j];
        A.selfadjointView<Eigen::Lower>().rankUpdate(c);
        b += c * (y[i] - my);
    }
    A = A.selfadjointView<Eigen::Lower>();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    if (ldlt.info() != Eigen::Success || !(A.diagonal().minCoeff() > 0.0) || ldlt.rcond() < 1e-12) {
        if (singular) *singular = true;
        return fit;
    }
    const Eigen::VectorXd beta = ldlt.solve(b);
    if (!beta.allFinite()) {
        if (singular) *singular = true;
        return fit;
    }
    fit.mean_x = mx;
    fit.beta.assign(beta.data(), beta.data() + beta.size());
    return fit;
}

LocalLinearModel LocalLinearModel::fit(const QuantileMesh& mesh, const FeatureMatrix& x, std::span<const double> y,
                                       std::span<const std::size_t> cell_index) {
    if (y.size() != x.rows || cell_index.size() != x.rows)
        throw InvalidInput("local regression: features, targets and cell indices differ in length");
    if (mesh.dims() != x.dims) throw InvalidInput("local regression: mesh dimension mismatch");
    const std::size_t cells = mesh.cells();
    std::vector<std::vector<std::size_t>> members(cells);
    for (std::size_t i = 0; i < x.rows; ++i) members[cell_index[i]].push_back(i);

    const CellFit global = affine_fit(x, y, {});
    LocalLinearModel model;
    model.cells_.resize(cells);
    model.kinds_.resize(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        const auto& idx = members[c];
        if (idx.empty()) {
            model.cells_[c] = global;
            model.kinds_[c] = CellFitKind::Global;
            continue;
        }
        if (idx.size() < x.dims + 2) {
            CellFit mean_only;
            double k = 0.0;
            for (std::size_t i : idx) mean_only.mean_y += (y[i] - mean_only.mean_y) / ++k;
            model.cells_[c] = std::move(mean_only);
            model.kinds_[c] = CellFitKind::Mean;
            continue;
        }
        bool singular = false;
        model.cells_[c] = affine_fit(x, y, idx, &singular);
        model.kinds_[c] = model.cells_[c].beta.empty() ? CellFitKind::Mean : CellFitKind::Affine;
    }
    return model;
}

void LocalLinearModel::write(std::ostream& out) const {
    binio::put<std::uint64_t>(out, cells_.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) {
        const auto& f = cells_[c];
        binio::put<std::uint8_t>(out, static_cast<std::uint8_t>(kinds_[c]));
        binio::put(out, f.mean_y);
        binio::put<std::uint8_t>(out, f.beta.empty() ? 0 : 1);
        for (std::size_t j = 0; j < f.beta.size(); ++j) {
            binio::put(out, f.mean_x[j]);
            binio::put(out, f.beta[j]);
        }
    }
}

LocalLinearModel LocalLinearModel::read(std::istream& in, std::size_t dims) {
    LocalLinearModel model;
    const auto cells = binio::get<std::uint64_t>(in, "regression model");
    if (cells > (1u << 20)) throw InvalidInput("regression model: implausible cell count");
    model.cells_.resize(cells);
    model.kinds_.resize(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        const auto kind = binio::get<std::uint8_t>(in, "regression model");
        if (kind > 2) throw InvalidInput("regression model: bad cell kind");
        model.kinds_[c] = static_cast<CellFitKind>(kind);
        auto& f = model.cells_[c];
        f.mean_y = binio::get<double>(in, "regression model");
        if (binio::get<std::uint8_t>(in, "regression model") != 0) {
            f.mean_x.resize(dims);
            f.beta.resize(dims);
            for (std::size_t j = 0; j < dims; ++j) {
                f.mean_x[j] = binio::get<double>(in, "regression model");
                f.beta[j] = binio::get<double>(in, "regression model");
            }
        }
    }
    return model;
}

LocalRegression LocalRegression::fit(const FeatureMatrix& x, std::span<const double> y,
                                     std::vector<std::size_t> blocks) {
    LocalRegression r;
    r.mesh = QuantileMesh::build(x, std::move(blocks));
    std::vector<std::size_t> cell(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) cell[i] = r.mesh.cell_of(x.row(i));
    r.model = LocalLinearModel::fit(r.mesh, x, y, cell);
    return r;
}

}  // namespace cshock
