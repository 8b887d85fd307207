#include "takdual/groups.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace takdual::groups {

FiniteAbelianGroup::FiniteAbelianGroup(std::vector<int> orders)
    : orders_(std::move(orders)) {
  if (orders_.empty()) orders_ = {1};
  order_ = 1;
  for (int n : orders_) {
    if (n < 1) throw std::invalid_argument("group factor order must be >= 1");
    order_ *= n;
  }
}

std::vector<int> FiniteAbelianGroup::tuple(int index) const {
  std::vector<int> t(orders_.size());
  for (int j = static_cast<int>(orders_.size()) - 1; j >= 0; --j) {
    t[static_cast<size_t>(j)] = index % orders_[static_cast<size_t>(j)];
    index /= orders_[static_cast<size_t>(j)];
  }
  return t;
}

int FiniteAbelianGroup::index(const std::vector<int>& tuple) const {
  if (tuple.size() != orders_.size())
    throw std::invalid_argument("element tuple has wrong rank");
  int idx = 0;
  for (size_t j = 0; j < orders_.size(); ++j) {
    int c = tuple[j] % orders_[j];
    if (c < 0) c += orders_[j];
    idx = idx * orders_[j] + c;
  }
  return idx;
}

int FiniteAbelianGroup::compose(int a, int b) const {
  std::vector<int> ta = tuple(a), tb = tuple(b);
  for (size_t j = 0; j < orders_.size(); ++j) ta[j] = (ta[j] + tb[j]) % orders_[j];
  return index(ta);
}

int FiniteAbelianGroup::inverse(int a) const {
  std::vector<int> t = tuple(a);
  for (size_t j = 0; j < orders_.size(); ++j) t[j] = (orders_[j] - t[j]) % orders_[j];
  return index(t);
}

int FiniteAbelianGroup::factor_generator(int j) const {
  std::vector<int> t(orders_.size(), 0);
  t[static_cast<size_t>(j)] = orders_[static_cast<size_t>(j)] > 1 ? 1 : 0;
  return index(t);
}

Mat FiniteAbelianGroup::left_translation(int a) const {
  Mat m = Mat::Zero(order_, order_);
  for (int b = 0; b < order_; ++b) m(compose(a, b), b) = 1.0;
  return m;
}

Character::Character(const FiniteAbelianGroup* group, int dual_index)
    : group_(group), dual_index_(dual_index), exponents_(group->tuple(dual_index)) {}

Cplx Character::operator()(int element_index) const {
  const std::vector<int> u = group_->tuple(element_index);
  double phase = 0.0;
  for (size_t j = 0; j < u.size(); ++j) {
    const int n = group_->orders()[j];
    phase += static_cast<double>(exponents_[j]) * static_cast<double>(u[j]) /
             static_cast<double>(n);
  }
  phase *= 2.0 * std::numbers::pi;
  return Cplx(std::cos(phase), std::sin(phase));
}

DualGroup::DualGroup(const FiniteAbelianGroup& group)
    : host_(&group), index_group_(group.orders()) {}

int DualGroup::find_character(const std::function<Cplx(int)>& values, double tol) const {
  for (int g = 0; g < size(); ++g) {
    Character chi = character(g);
    bool match = true;
    for (int u = 0; u < host_->order(); ++u) {
      if (std::abs(chi(u) - values(u)) > tol) {
        match = false;
        break;
      }
    }
    if (match) return g;
  }
  return -1;
}

Mat fourier_transform(const FiniteAbelianGroup& group) {
  const int n = group.order();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Mat f(n, n);
  for (int g = 0; g < n; ++g) {
    Character chi(&group, g);
    for (int u = 0; u < n; ++u) f(g, u) = std::conj(chi(u)) * scale;
  }
  return f;
}

Cplx invariant_mean(const FiniteAbelianGroup& group, const std::function<Cplx(int)>& f) {
  Cplx sum = 0;
  for (int u = 0; u < group.order(); ++u) sum += f(u);
  return sum / static_cast<double>(group.order());
}

}  // namespace takdual::groups
