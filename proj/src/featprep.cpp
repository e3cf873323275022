/*
 * Copyright 2026 The divmine Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "divmine/featprep.hpp"

#include "divmine/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace divmine {

namespace {

std::vector<double> copy_values(const FeatureMatrix& m)
{
    return std::vector<double>(m.values().begin(), m.values().end());
}

std::string exact(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join_exact(const double* v, std::size_t n)
{
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
        if (i)
            s += ' ';
        s += exact(v[i]);
    }
    return s;
}

std::vector<double> parse_reals(const std::string& text, const std::string& origin, std::size_t line)
{
    std::istringstream in(text);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
        double v = 0.0;
        const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (r.ec != std::errc() || r.ptr != tok.data() + tok.size())
            throw ParseError(origin, line, "bad number '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

std::size_t parse_count(const std::string& text, const std::string& origin, std::size_t line)
{
    std::size_t v = 0;
    const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
    if (r.ec != std::errc() || r.ptr != text.data() + text.size())
        throw ParseError(origin, line, "bad count '" + text + "'");
    return v;
}

} // namespace

Dataset speaker_zscore(const Dataset& data, const std::string& block)
{
    const FeatureMatrix& m = data.features();
    const BlockSpec& b = m.block(block);
    const std::size_t dim = m.cols();

    std::unordered_map<std::string, std::vector<std::size_t>> by_speaker;
    std::vector<const std::string*> order;
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto [it, fresh] = by_speaker.try_emplace(data.meta(i).speaker_id);
        if (fresh)
            order.push_back(&it->first);
        it->second.push_back(i);
    }

    std::vector<double> out = copy_values(m);
    for (const std::string* speaker : order) {
        const auto& rows = by_speaker.at(*speaker);
        const double count = static_cast<double>(rows.size());
        for (std::size_t j = b.start_col; j < b.start_col + b.width; ++j) {
            double mean = 0.0;
            for (std::size_t i : rows)
                mean += m.at(i, j);
            mean /= count;
            double var = 0.0;
            for (std::size_t i : rows) {
                const double dv = m.at(i, j) - mean;
                var += dv * dv;
            }
            const double sd = std::sqrt(var / count);
            for (std::size_t i : rows)
                out[i * dim + j] = (rows.size() >= 2 && sd > 0.0) ? (m.at(i, j) - mean) / sd : 0.0;
        }
    }
    return data.with_features(FeatureMatrix(m.rows(), dim, std::move(out), m.blocks()));
}

PcaModel fit_pca(const Dataset& data, const std::string& block, std::size_t n_components)
{
    const FeatureMatrix& m = data.features();
    const BlockSpec& b = m.block(block);
    const std::size_t n = m.rows();
    if (n_components < 1 || n_components > b.width)
        throw ConfigError("PCA components " + std::to_string(n_components) + " must lie in [1, block width " +
                          std::to_string(b.width) + "]");
    if (n < 2 || n_components > n - 1)
        throw ConfigError("PCA components " + std::to_string(n_components) + " exceed n - 1 = " +
                          std::to_string(n < 1 ? 0 : n - 1));

    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(b.width));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < b.width; ++j)
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m.at(i, b.start_col + j);
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success)
        throw ValidationError("PCA eigen-decomposition failed for block '" + block + "'");

    PcaModel model;
    model.block = block;
    model.input_width = b.width;
    model.mean.assign(mean.data(), mean.data() + mean.size());
    const auto w = static_cast<Eigen::Index>(b.width);
    for (std::size_t c = 0; c < n_components; ++c) {
        const Eigen::Index col = w - 1 - static_cast<Eigen::Index>(c); // eigenvalues come ascending
        Eigen::VectorXd v = eig.eigenvectors().col(col);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0.0)
            v = -v;
        model.components.insert(model.components.end(), v.data(), v.data() + v.size());
        model.explained_variance.push_back(std::max(0.0, eig.eigenvalues()(col)));
    }
    return model;
}

Dataset apply_pca(const Dataset& data, const PcaModel& model)
{
    const FeatureMatrix& m = data.features();
    const BlockSpec& b = m.block(model.block);
    if (b.width != model.input_width)
        throw ValidationError("PCA model expects block '" + model.block + "' of width " +
                              std::to_string(model.input_width) + ", got " + std::to_string(b.width));
    const std::size_t n_comp = model.n_components();
    const std::size_t new_dim = m.cols() - b.width + n_comp;

    std::vector<BlockSpec> layout;
    std::size_t col = 0;
    for (const auto& blk : m.blocks()) {
        const std::size_t width = blk.name == b.name ? n_comp : blk.width;
        layout.push_back({blk.name, col, width});
        col += width;
    }

    std::vector<double> out;
    out.reserve(m.rows() * new_dim);
    std::vector<double> centered(b.width);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto r = m.row(i);
        out.insert(out.end(), r.begin(), r.begin() + b.start_col);
        for (std::size_t j = 0; j < b.width; ++j)
            centered[j] = r[b.start_col + j] - model.mean[j];
        for (std::size_t c = 0; c < n_comp; ++c) {
            const double* axis = model.components.data() + c * b.width;
            double s = 0.0;
            for (std::size_t j = 0; j < b.width; ++j)
                s += centered[j] * axis[j];
            out.push_back(s);
        }
        out.insert(out.end(), r.begin() + b.start_col + b.width, r.end());
    }
    return data.with_features(FeatureMatrix(m.rows(), new_dim, std::move(out), std::move(layout)));
}

double block_total_variance(const FeatureMatrix& m, const BlockSpec& block)
{
    const double n = static_cast<double>(m.rows());
    double total = 0.0;
    for (std::size_t j = block.start_col; j < block.start_col + block.width; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i)
            mean += m.at(i, j);
        mean /= n;
        double var = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            const double d = m.at(i, j) - mean;
            var += d * d;
        }
        total += var / n;
    }
    return total;
}

Balanced balance_blocks(const Dataset& data)
{
    if (data.size() == 0)
        throw ValidationError("cannot balance an empty dataset");
    BalanceWeights w;
    for (const auto& b : data.blocks()) {
        const double v = block_total_variance(data.features(), b);
        if (!(v > 0.0) || !std::isfinite(v))
            throw ValidationError("block '" + b.name + "' has zero total variance");
        w.blocks.push_back(b.name);
        w.scales.push_back(std::sqrt(w.target_per_block_variance / v));
    }
    Dataset scaled = apply_balance(data, w);
    return {std::move(scaled), std::move(w)};
}

Dataset apply_balance(const Dataset& data, const BalanceWeights& weights)
{
    const FeatureMatrix& m = data.features();
    std::vector<double> out = copy_values(m);
    for (std::size_t bi = 0; bi < weights.blocks.size(); ++bi) {
        const BlockSpec& b = m.block(weights.blocks[bi]);
        const double s = weights.scales[bi];
        if (!(s > 0.0) || !std::isfinite(s))
            throw ValidationError("balance scale for block '" + b.name + "' must be finite and positive");
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = b.start_col; j < b.start_col + b.width; ++j)
                out[i * m.cols() + j] *= s;
    }
    return data.with_features(FeatureMatrix(m.rows(), m.cols(), std::move(out), m.blocks()));
}

Prepared prepare(const Dataset& data, const PrepConfig& config)
{
    Prepared p{data, {}};
    for (const auto& b : config.zscore_blocks) {
        p.data = speaker_zscore(p.data, b);
        p.model.zscore_blocks.push_back(b);
    }
    if (config.pca_block) {
        p.model.pca = fit_pca(p.data, *config.pca_block, config.pca_components);
        p.data = apply_pca(p.data, *p.model.pca);
    }
    if (config.balance) {
        auto balanced = balance_blocks(p.data);
        p.data = std::move(balanced.data);
        p.model.balance = std::move(balanced.weights);
    }
    return p;
}

Dataset apply_prep(const Dataset& data, const PrepModel& model)
{
    Dataset out = data;
    for (const auto& b : model.zscore_blocks)
        out = speaker_zscore(out, b);
    if (model.pca)
        out = apply_pca(out, *model.pca);
    if (model.balance)
        out = apply_balance(out, *model.balance);
    return out;
}

void write_prep_model(std::ostream& out, const PrepModel& model)
{
    out << "# divmine feature-prep model\n";
    for (const auto& b : model.zscore_blocks)
        out << "zscore = " << b << '\n';
    if (model.pca) {
        const auto& p = *model.pca;
        out << "pca.block = " << p.block << '\n';
        out << "pca.input_width = " << p.input_width << '\n';
        out << "pca.components = " << p.n_components() << '\n';
        out << "pca.mean = " << join_exact(p.mean.data(), p.mean.size()) << '\n';
        out << "pca.explained_variance = " << join_exact(p.explained_variance.data(), p.explained_variance.size())
            << '\n';
        for (std::size_t c = 0; c < p.n_components(); ++c)
            out << "pca.axis." << c << " = " << join_exact(p.components.data() + c * p.input_width, p.input_width)
                << '\n';
    }
    if (model.balance) {
        out << "balance.target = " << exact(model.balance->target_per_block_variance) << '\n';
        for (std::size_t i = 0; i < model.balance->blocks.size(); ++i)
            out << "balance.scale." << model.balance->blocks[i] << " = " << exact(model.balance->scales[i]) << '\n';
    }
}

PrepModel read_prep_model(std::istream& in, const std::string& origin)
{
    PrepModel model;
    std::map<std::size_t, std::vector<double>> axes;
    std::size_t declared = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(origin, lineno, "expected 'key = value'");
        auto strip = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto z = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, z - a + 1);
        };
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        auto pca = [&]() -> PcaModel& {
            if (!model.pca)
                model.pca.emplace();
            return *model.pca;
        };
        auto balance = [&]() -> BalanceWeights& {
            if (!model.balance)
                model.balance.emplace();
            return *model.balance;
        };
        if (key == "zscore") {
            model.zscore_blocks.push_back(value);
        } else if (key == "pca.block") {
            pca().block = value;
        } else if (key == "pca.input_width") {
            pca().input_width = parse_count(value, origin, lineno);
        } else if (key == "pca.components") {
            declared = parse_count(value, origin, lineno);
        } else if (key == "pca.mean") {
            pca().mean = parse_reals(value, origin, lineno);
        } else if (key == "pca.explained_variance") {
            pca().explained_variance = parse_reals(value, origin, lineno);
        } else if (key.rfind("pca.axis.", 0) == 0) {
            axes[parse_count(key.substr(9), origin, lineno)] = parse_reals(value, origin, lineno);
        } else if (key == "balance.target") {
            const auto v = parse_reals(value, origin, lineno);
            if (v.size() != 1)
                throw ParseError(origin, lineno, "balance.target takes one value");
            balance().target_per_block_variance = v[0];
        } else if (key.rfind("balance.scale.", 0) == 0) {
            const auto v = parse_reals(value, origin, lineno);
            if (v.size() != 1)
                throw ParseError(origin, lineno, "balance scale takes one value");
            balance().blocks.push_back(key.substr(14));
            balance().scales.push_back(v[0]);
        } else {
            throw ParseError(origin, lineno, "unknown key '" + key + "'");
        }
    }
    if (model.pca) {
        auto& p = *model.pca;
        if (p.mean.size() != p.input_width || p.explained_variance.size() != declared || axes.size() != declared)
            throw ParseError(origin, lineno, "inconsistent PCA model dimensions");
        for (const auto& [c, axis] : axes) {
            if (c != p.components.size() / std::max<std::size_t>(1, p.input_width) || axis.size() != p.input_width)
                throw ParseError(origin, lineno, "PCA axis " + std::to_string(c) + " malformed");
            p.components.insert(p.components.end(), axis.begin(), axis.end());
        }
    }
    return model;
}

} // namespace divmine
