#pragma once

// Local adaptive linear regression: an equal-count quantile mesh on the
// feature cloud with one affine least-squares fit per cell.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace cshock {

// Row-major n x dims sample matrix.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t dims = 0;
    std::vector<double> values;

    FeatureMatrix() = default;
    FeatureMatrix(std::size_t n, std::size_t d) : rows(n), dims(d), values(n * d) {}
    const double* row(std::size_t i) const { return values.data() + i * dims; }
    double* row(std::size_t i) { return values.data() + i * dims; }
};

// Blocks per dimension: 4 for the first four, 1 beyond.
std::vector<std::size_t> standard_blocks(std::size_t dims);

// Recursive quantile partition: sort on dimension 0, cut into equal-count
// blocks, recurse into dimension 1 inside each block, and so on. The threshold
// between two blocks is the value of the first sample of the upper block; a
// point goes to block upper_bound(thresholds, x).
class QuantileMesh {
public:
    QuantileMesh() = default;
    static QuantileMesh build(const FeatureMatrix& x, std::vector<std::size_t> blocks);

    std::size_t dims() const noexcept { return blocks_.size(); }
    std::size_t cells() const noexcept;
    std::size_t cell_of(const double* x) const;
    std::span<const std::size_t> blocks() const noexcept { return blocks_; }

    void write(std::ostream& out) const;
    static QuantileMesh read(std::istream& in);

    friend bool operator==(const QuantileMesh&, const QuantileMesh&) = default;

private:
    std::vector<std::size_t> blocks_;
    // thresholds_[level][node * (blocks_[level] - 1) + k]
    std::vector<std::vector<double>> thresholds_;
};

struct CellFit {
    double mean_y = 0.0;
    std::vector<double> mean_x;  // empty for a constant fit
    std::vector<double> beta;

    double predict(const double* x) const;
};

enum class CellFitKind : std::uint8_t { Affine, Mean, Global };

class LocalLinearModel {
public:
    LocalLinearModel() = default;

    // Fits y on x over the cells of mesh. Cells with fewer than dims + 2
    // samples, or with (near-)singular normal equations, use the cell mean;
    // empty cells use the global affine fit.
    static LocalLinearModel fit(const QuantileMesh& mesh, const FeatureMatrix& x, std::span<const double> y,
                                std::span<const std::size_t> cell_index);

    double predict(const QuantileMesh& mesh, const double* x) const { return cells_[mesh.cell_of(x)].predict(x); }
    const std::vector<CellFit>& cells() const noexcept { return cells_; }
    const std::vector<CellFitKind>& kinds() const noexcept { return kinds_; }

    void write(std::ostream& out) const;
    static LocalLinearModel read(std::istream& in, std::size_t dims);

private:
    std::vector<CellFit> cells_;
    std::vector<CellFitKind> kinds_;
};

// Mesh plus model, for standalone use.
struct LocalRegression {
    QuantileMesh mesh;
    LocalLinearModel model;

    static LocalRegression fit(const FeatureMatrix& x, std::span<const double> y, std::vector<std::size_t> blocks);
    double predict(const double* x) const { return model.predict(mesh, x); }
};

// Ordinary least squares affine fit over the given sample indices (all when empty).
CellFit affine_fit(const FeatureMatrix& x, std::span<const double> y, std::span<const std::size_t> indices,
                   bool* singular = nullptr);

}  // namespace cshock
