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

#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace maxent {

/// Fixed-universe bit set over the value indices [0, universe) of one attribute.
class ValueSet {
public:
    ValueSet() = default;
    explicit ValueSet(std::uint32_t universe, bool filled = false)
        : universe_(universe), words_((universe + 63) / 64, filled ? ~std::uint64_t{0} : 0) {
        if (filled) trim();
    }

    static ValueSet range(std::uint32_t universe, std::uint32_t lo, std::uint32_t hi) {
        ValueSet s(universe);
        for (std::uint32_t v = lo; v <= hi && v < universe; ++v) s.insert(v);
        return s;
    }

    std::uint32_t universe() const noexcept { return universe_; }

    void insert(std::uint32_t v) { words_[v >> 6] |= std::uint64_t{1} << (v & 63); }
    void erase(std::uint32_t v) { words_[v >> 6] &= ~(std::uint64_t{1} << (v & 63)); }
    bool contains(std::uint32_t v) const noexcept {
        return v < universe_ && ((words_[v >> 6] >> (v & 63)) & 1U);
    }

    std::size_t count() const noexcept {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }
    bool empty() const noexcept {
        for (auto w : words_)
            if (w != 0) return false;
        return true;
    }
    bool full() const noexcept { return count() == universe_; }

    ValueSet& operator&=(const ValueSet& other) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
        return *this;
    }
    friend ValueSet operator&(ValueSet a, const ValueSet& b) { return a &= b; }

    bool intersects(const ValueSet& other) const noexcept {
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & other.words_[i]) return true;
        return false;
    }
    bool subset_of(const ValueSet& other) const noexcept {
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & ~other.words_[i]) return false;
        return true;
    }

    /// Ascending list of members.
    std::vector<std::uint32_t> members() const {
        std::vector<std::uint32_t> out;
        out.reserve(count());
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t bits = words_[w];
            while (bits != 0) {
                out.push_back(static_cast<std::uint32_t>(w * 64 + std::countr_zero(bits)));
                bits &= bits - 1;
            }
        }
        return out;
    }

    friend bool operator==(const ValueSet&, const ValueSet&) = default;

    std::size_t hash() const noexcept {
        std::size_t h = universe_;
        for (auto w : words_) h ^= std::hash<std::uint64_t>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }

private:
    void trim() {
        if (universe_ % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (universe_ % 64)) - 1;
    }

    std::uint32_t universe_ = 0;
    std::vector<std::uint64_t> words_;
};

}  // namespace maxent
