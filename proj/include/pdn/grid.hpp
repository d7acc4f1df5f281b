#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdn {

struct GridDims {
    int rows = 0;
    int cols = 0;

    [[nodiscard]] int count() const { return rows * cols; }
    friend bool operator==(const GridDims&, const GridDims&) = default;
};

struct GridCoord {
    int row = 0;
    int col = 0;

    friend bool operator==(const GridCoord&, const GridCoord&) = default;
    friend auto operator<=>(const GridCoord&, const GridCoord&) = default;
};

// Row-major dense 2D grid with value semantics.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(GridDims dims, T fill = T{})
        : dims_(dims), data_(static_cast<std::size_t>(dims.count()), fill) {}

    [[nodiscard]] GridDims dims() const { return dims_; }
    [[nodiscard]] int rows() const { return dims_.rows; }
    [[nodiscard]] int cols() const { return dims_.cols; }
    [[nodiscard]] std::size_t size() const { return data_.size(); }
    [[nodiscard]] bool empty() const { return data_.empty(); }

    [[nodiscard]] bool contains(GridCoord c) const {
        return c.row >= 0 && c.col >= 0 && c.row < dims_.rows && c.col < dims_.cols;
    }

    T& operator()(int r, int c) { return data_[index(r, c)]; }
    const T& operator()(int r, int c) const { return data_[index(r, c)]; }
    T& operator[](GridCoord c) { return (*this)(c.row, c.col); }
    const T& operator[](GridCoord c) const { return (*this)(c.row, c.col); }

    T& at(GridCoord c) {
        if (!contains(c)) throw std::out_of_range("grid coordinate out of range");
        return (*this)[c];
    }
    const T& at(GridCoord c) const {
        if (!contains(c)) throw std::out_of_range("grid coordinate out of range");
        return (*this)[c];
    }

    [[nodiscard]] const std::vector<T>& values() const { return data_; }
    [[nodiscard]] std::vector<T>& values() { return data_; }

    auto begin() { return data_.begin(); }
    auto end() { return data_.end(); }
    auto begin() const { return data_.begin(); }
    auto end() const { return data_.end(); }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    [[nodiscard]] std::size_t index(int r, int c) const {
        return static_cast<std::size_t>(r) * static_cast<std::size_t>(dims_.cols) +
               static_cast<std::size_t>(c);
    }

    GridDims dims_{};
    std::vector<T> data_;
};

using BinaryGrid = Grid<int>;
using LevelGrid = Grid<int>;

}  // namespace pdn
