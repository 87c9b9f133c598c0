/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace maxent {

/// Dense row-major matrix of nonnegative counts.
class CountMatrix {
public:
    CountMatrix() = default;
    CountMatrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    CountMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) throw std::invalid_argument("CountMatrix: data size mismatch");
    }
    static CountMatrix from_rows(const std::vector<std::vector<double>>& rows) {
        CountMatrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
        for (std::size_t x = 0; x < m.rows_; ++x) {
            if (rows[x].size() != m.cols_) throw std::invalid_argument("CountMatrix: ragged rows");
            for (std::size_t y = 0; y < m.cols_; ++y) m(x, y) = rows[x][y];
        }
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t cells() const noexcept { return data_.size(); }

    double& operator()(std::size_t x, std::size_t y) { return data_[x * cols_ + y]; }
    double operator()(std::size_t x, std::size_t y) const { return data_[x * cols_ + y]; }

    double total() const noexcept {
        double t = 0.0;
        for (double v : data_) t += v;
        return t;
    }

    /// Matrix with rows and columns reordered: result(x, y) = (*this)(row_perm[x], col_perm[y]).
    CountMatrix permuted(const std::vector<std::size_t>& row_perm, const std::vector<std::size_t>& col_perm) const {
        CountMatrix out(rows_, cols_);
        for (std::size_t x = 0; x < rows_; ++x)
            for (std::size_t y = 0; y < cols_; ++y) out(x, y) = (*this)(row_perm[x], col_perm[y]);
        return out;
    }

    const std::vector<double>& data() const noexcept { return data_; }
    friend bool operator==(const CountMatrix&, const CountMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace maxent
