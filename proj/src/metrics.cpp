#include "lcl/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "lcl/errors.hpp"

namespace lcl {

namespace {

Eigen::MatrixXd to_eigen(const Tensor<float>& t) {
    if (t.rank() != 2) throw ContractViolation("metric input must be (N x D)");
    Eigen::MatrixXd m(t.shape[0], t.shape[1]);
    for (int64_t i = 0; i < t.shape[0]; ++i)
        for (int64_t j = 0; j < t.shape[1]; ++j) m(i, j) = static_cast<double>(t.at(i, j));
    return m;
}

// symmetric PSD square root with relative eigenvalue clamping
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()));
    Eigen::VectorXd ev = es.eigenvalues();
    const double floor = 1e-10 * std::max(0.0, ev.maxCoeff());
    for (int i = 0; i < ev.size(); ++i) ev(i) = ev(i) > floor ? std::sqrt(ev(i)) : 0.0;
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

void check_covariance_rows(const Tensor<float>& t, const char* which) {
    if (t.rank() != 2 || t.shape[0] < t.shape[1] + 1)
        throw ContractViolation(std::string("frechet_distance: covariance degenerate for ") + which + " set (need > D rows, got " +
                                std::to_string(t.rank() == 2 ? t.shape[0] : 0) + ")");
}

double poly3_kernel(const float* a, const float* b, int64_t d) {
    double dot = 0;
    for (int64_t i = 0; i < d; ++i) dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    const double base = dot / static_cast<double>(d) + 1.0;
    return base * base * base;
}

}  // namespace

double frechet_distance(const Tensor<float>& x, const Tensor<float>& y) {
    check_covariance_rows(x, "first");
    check_covariance_rows(y, "second");
    if (x.shape[1] != y.shape[1]) throw ContractViolation("frechet_distance: dimension mismatch");
    require_finite(x, "frechet first set");
    require_finite(y, "frechet second set");

    Eigen::MatrixXd mx = to_eigen(x), my = to_eigen(y);
    const Eigen::VectorXd mux = mx.colwise().mean(), muy = my.colwise().mean();
    mx.rowwise() -= mux.transpose();
    my.rowwise() -= muy.transpose();
    const Eigen::MatrixXd cx = mx.transpose() * mx / static_cast<double>(x.shape[0] - 1);
    const Eigen::MatrixXd cy = my.transpose() * my / static_cast<double>(y.shape[0] - 1);

    const Eigen::MatrixXd sx = psd_sqrt(cx);
    Eigen::MatrixXd inner = sx * cy * sx;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (inner + inner.transpose()));
    Eigen::VectorXd ev = es.eigenvalues();
    const double floor = 1e-10 * std::max(0.0, ev.maxCoeff());
    double tr_sqrt = 0;
    for (int i = 0; i < ev.size(); ++i)
        if (ev(i) > floor) tr_sqrt += std::sqrt(ev(i));

    const double fd = (mux - muy).squaredNorm() + cx.trace() + cy.trace() - 2.0 * tr_sqrt;
    return std::max(fd, 0.0);
}

double kernel_distance(const Tensor<float>& x, const Tensor<float>& y) {
    if (x.rank() != 2 || y.rank() != 2 || x.shape[1] != y.shape[1])
        throw ContractViolation("kernel_distance: need (N x D) sets of equal dimension");
    const int64_t m = x.shape[0], n = y.shape[0], d = x.shape[1];
    if (m < 2 || n < 2) throw ContractViolation("kernel_distance: singleton sets have no unbiased estimate");

    double xx = 0, yy = 0, xy = 0;
    for (int64_t i = 0; i < m; ++i)
        for (int64_t j = i + 1; j < m; ++j) xx += poly3_kernel(&x.data[static_cast<size_t>(i * d)], &x.data[static_cast<size_t>(j * d)], d);
    for (int64_t i = 0; i < n; ++i)
        for (int64_t j = i + 1; j < n; ++j) yy += poly3_kernel(&y.data[static_cast<size_t>(i * d)], &y.data[static_cast<size_t>(j * d)], d);
    for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j) xy += poly3_kernel(&x.data[static_cast<size_t>(i * d)], &y.data[static_cast<size_t>(j * d)], d);

    return 2.0 * xx / (static_cast<double>(m) * (m - 1)) + 2.0 * yy / (static_cast<double>(n) * (n - 1)) -
           2.0 * xy / (static_cast<double>(m) * n);
}

std::pair<double, double> density_coverage(const Tensor<float>& real, const Tensor<float>& gen, int k) {
    if (real.rank() != 2 || gen.rank() != 2 || real.shape[1] != gen.shape[1])
        throw ContractViolation("density_coverage: need (N x D) sets of equal dimension");
    const int64_t nr = real.shape[0], ng = gen.shape[0], d = real.shape[1];
    if (k < 1 || nr <= k) throw ContractViolation("density_coverage: need |real| > k >= 1");

    auto sqdist = [d](const float* a, const float* b) {
        double s = 0;
        for (int64_t i = 0; i < d; ++i) {
            const double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
            s += diff * diff;
        }
        return s;
    };

    // k-th nearest neighbor radius within the real set, self excluded
    std::vector<double> r2(static_cast<size_t>(nr));
    std::vector<double> dists;
    for (int64_t i = 0; i < nr; ++i) {
        dists.clear();
        for (int64_t j = 0; j < nr; ++j) {
            if (j == i) continue;
            dists.push_back(sqdist(&real.data[static_cast<size_t>(i * d)], &real.data[static_cast<size_t>(j * d)]));
        }
        std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
        r2[static_cast<size_t>(i)] = dists[static_cast<size_t>(k - 1)];
    }

    int64_t density_hits = 0, covered = 0;
    std::vector<bool> real_covered(static_cast<size_t>(nr), false);
    for (int64_t j = 0; j < ng; ++j) {
        for (int64_t i = 0; i < nr; ++i) {
            if (sqdist(&gen.data[static_cast<size_t>(j * d)], &real.data[static_cast<size_t>(i * d)]) <=
                r2[static_cast<size_t>(i)]) {
                ++density_hits;
                real_covered[static_cast<size_t>(i)] = true;
            }
        }
    }
    for (bool c : real_covered) covered += c ? 1 : 0;

    const double density = ng == 0 ? 0.0 : static_cast<double>(density_hits) / (static_cast<double>(k) * ng);
    const double coverage = static_cast<double>(covered) / static_cast<double>(nr);
    return {density, coverage};
}

double cosine_score(const std::vector<float>& a, const std::vector<float>& b) {
    if (a.size() != b.size() || a.empty()) throw ContractViolation("cosine_score: dimension mismatch");
    double dot = 0, na = 0, nb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw ContractViolation("cosine_score: zero vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double mean_row_cosine(const Tensor<float>& a, const Tensor<float>& b) {
    if (a.rank() != 2 || !a.same_shape(b) || a.shape[0] == 0)
        throw ContractViolation("mean_row_cosine: need matching nonempty (N x D) sets");
    const int64_t n = a.shape[0], d = a.shape[1];
    double sum = 0;
    std::vector<float> ra(static_cast<size_t>(d)), rb(static_cast<size_t>(d));
    for (int64_t i = 0; i < n; ++i) {
        std::copy(a.data.begin() + i * d, a.data.begin() + (i + 1) * d, ra.begin());
        std::copy(b.data.begin() + i * d, b.data.begin() + (i + 1) * d, rb.begin());
        sum += cosine_score(ra, rb);
    }
    return sum / static_cast<double>(n);
}

void MetricCell::set(const std::string& name, MetricStat s) {
    if (!values.count(name)) order.push_back(name);
    values[name] = s;
}

const MetricStat& MetricCell::at(const std::string& name) const {
    auto it = values.find(name);
    if (it == values.end()) throw ContractViolation("metric cell missing column: " + name);
    return it->second;
}

void MetricRegistry::add(const std::string& name, AdherenceFn fn) {
    if (has(name)) throw ContractViolation("adherence metric already registered: " + name);
    entries_.emplace_back(name, std::move(fn));
}

void MetricRegistry::remove(const std::string& name) {
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == name; });
    if (it == entries_.end()) throw ContractViolation("adherence metric not registered: " + name);
    entries_.erase(it);
}

bool MetricRegistry::has(const std::string& name) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == name; });
}

MetricCell evaluation_protocol(const BatchGenerator& gen, const Tensor<float>& reference, int batches, int batch_size,
                               int density_k, const MetricRegistry* plugins, const std::vector<ExtraMetric>& extras) {
    if (batches < 1 || batch_size < 1) throw ContractViolation("evaluation_protocol: need batches, batch_size >= 1");

    std::vector<std::string> columns = {"kd", "fad", "cov", "den"};
    if (plugins)
        for (const auto& [name, fn] : plugins->entries()) columns.push_back(name);
    for (const auto& e : extras) columns.push_back(e.name);

    std::map<std::string, std::vector<double>> samples;
    for (int b = 0; b < batches; ++b) {
        Tensor<float> batch = gen(b, batch_size);
        if (batch.rank() != 2 || batch.shape[0] != batch_size || batch.shape[1] != reference.shape[1])
            throw IoError("evaluation_protocol: generator exhausted after " + std::to_string(b) + " of " +
                          std::to_string(batches) + " batches");
        samples["kd"].push_back(kernel_distance(reference, batch));
        samples["fad"].push_back(frechet_distance(reference, batch));
        auto [den, cov] = density_coverage(reference, batch, density_k);
        samples["cov"].push_back(cov);
        samples["den"].push_back(den);
        if (plugins)
            for (const auto& [name, fn] : plugins->entries()) samples[name].push_back(fn(reference, batch));
        for (const auto& e : extras) samples[e.name].push_back(e.fn(b, batch));
    }

    MetricCell cell;
    for (const auto& name : columns) {
        const auto& v = samples.at(name);
        double mean = 0;
        for (double d : v) mean += d;
        mean /= static_cast<double>(v.size());
        double var = 0;
        for (double d : v) var += (d - mean) * (d - mean);
        const double stddev = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
        cell.set(name, MetricStat{mean, stddev});
    }
    return cell;
}

}  // namespace lcl
