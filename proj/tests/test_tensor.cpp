#include "ktvgl/tensor.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace ktvgl;

TEST_SUITE_BEGIN("tensor");

TEST_CASE("canonical linearization puts the first mode slowest") {
  DenseTensor x({2, 3}, {0, 1, 2, 3, 4, 5});
  const std::vector<int> idx{1, 2};
  CHECK(x.linear_index(idx) == 5);
  const std::vector<int> idx2{1, 0};
  CHECK(x.at(idx2) == 3.0);
}

TEST_CASE("construction validates shape and value count") {
  CHECK_THROWS_AS(DenseTensor({2, 0}), std::invalid_argument);
  CHECK_THROWS_AS(DenseTensor({2, 2}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("series rejects empty steps, shape mismatches and non-finite values") {
  const std::vector<int> shape{2, 2};
  CHECK_THROWS_AS(TensorSeries(shape, {}), std::invalid_argument);
  CHECK_THROWS_AS(TensorSeries(shape, {{}}), std::invalid_argument);
  CHECK_THROWS_AS(TensorSeries(shape, {{DenseTensor({2, 3})}}), std::invalid_argument);
  DenseTensor bad(shape);
  bad[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(TensorSeries(shape, {{bad}}), DataError);
}

TEST_CASE("mode-0 unfolding of a matrix is the matrix itself") {
  DenseTensor x({2, 3}, {1, 2, 3, 4, 5, 6});
  const Matrix u = unfold(x, 0);
  CHECK(u.rows() == 2);
  CHECK(u.cols() == 3);
  CHECK(u(0, 0) == 1.0);
  CHECK(u(0, 2) == 3.0);
  CHECK(u(1, 0) == 4.0);
}

TEST_CASE("mode-1 unfolding of a matrix is its transpose") {
  DenseTensor x({2, 3}, {1, 2, 3, 4, 5, 6});
  const Matrix u = unfold(x, 1);
  CHECK(u.rows() == 3);
  CHECK(u.cols() == 2);
  CHECK(u(0, 1) == 4.0);
  CHECK(u(2, 0) == 3.0);
}

TEST_CASE("middle-mode unfolding keeps earlier modes slowest in the columns") {
  std::vector<double> values(8);
  for (int i = 0; i < 8; ++i) values[static_cast<std::size_t>(i)] = i;
  DenseTensor x({2, 2, 2}, values);
  const Matrix u = unfold(x, 1);
  Matrix expected(2, 4);
  expected << 0, 1, 4, 5, 2, 3, 6, 7;
  CHECK(u.isApprox(expected));
}

TEST_CASE("unfolding rejects out-of-range modes") {
  DenseTensor x({2, 2});
  CHECK_THROWS_AS(unfold(x, -1), std::invalid_argument);
  CHECK_THROWS_AS(unfold(x, 2), std::invalid_argument);
}

TEST_CASE("fold round-trips unfold for every mode") {
  Rng rng(7);
  for (const auto& shape : std::vector<std::vector<int>>{{4}, {2, 3}, {3, 2, 4}, {2, 2, 3, 2}}) {
    const DenseTensor x = test::random_tensor(shape, rng);
    for (int m = 0; m < static_cast<int>(shape.size()); ++m) {
      const DenseTensor back = fold(unfold(x, m), m, shape);
      CHECK(back.values() == x.values());
    }
  }
}

TEST_CASE("kron_list of identities is the identity") {
  const Matrix k = kron_list({Matrix::Identity(2, 2), Matrix::Identity(3, 3)});
  CHECK(k.isApprox(Matrix::Identity(6, 6)));
}

TEST_CASE("kron_list with a 1x1 factor scales") {
  Rng rng(3);
  const Matrix a = test::random_matrix(3, 3, rng);
  Matrix scalar(1, 1);
  scalar << 2.0;
  CHECK(kron_list({scalar, a}).isApprox(2.0 * a));
}

TEST_CASE("kron_list matches the element-wise definition") {
  Rng rng(11);
  const Matrix a = test::random_matrix(2, 2, rng);
  const Matrix b = test::random_matrix(2, 2, rng);
  const Matrix k = kron_list({a, b});
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int p = 0; p < 2; ++p) {
        for (int q = 0; q < 2; ++q) {
          CHECK(k(2 * i + p, 2 * j + q) == doctest::Approx(a(i, j) * b(p, q)).epsilon(1e-14));
        }
      }
    }
  }
}

TEST_CASE("kron_list enforces the materialization cap") {
  const Matrix big = Matrix::Identity(70, 70);
  CHECK_THROWS_AS(kron_list({big, big}), std::invalid_argument);  // 4900 > 4096
  CHECK_NOTHROW(kron_list({big, big}, 4900));
}

TEST_CASE("mode products with identities leave the tensor unchanged") {
  Rng rng(5);
  const DenseTensor x = test::random_tensor({3, 4, 2}, rng);
  const std::vector<Matrix> mats{Matrix::Identity(3, 3), Matrix::Identity(4, 4), Matrix::Identity(2, 2)};
  const DenseTensor y = mode_product_all_except(x, mats, 1);
  CHECK(y.values() == x.values());
}

TEST_CASE("a scalar co-factor doubles every entry") {
  Rng rng(6);
  const DenseTensor x = test::random_tensor({2, 3}, rng);
  const std::vector<Matrix> mats{Matrix::Identity(2, 2), 2.0 * Matrix::Identity(3, 3)};
  const DenseTensor y = mode_product_all_except(x, mats, 0);
  for (std::int64_t i = 0; i < x.size(); ++i) CHECK(y[i] == doctest::Approx(2.0 * x[i]).epsilon(1e-14));
}

TEST_CASE("mode_product_all_except matches the explicit Kronecker route") {
  Rng rng(8);
  const std::vector<int> shape{3, 4, 2};
  const DenseTensor x = test::random_tensor(shape, rng);
  const std::vector<Matrix> mats{test::random_spd(3, rng), test::random_spd(4, rng), test::random_spd(2, rng)};
  const int skip = 1;

  const DenseTensor fast = mode_product_all_except(x, mats, skip);

  // unfold(x ×_{l != skip} A_l, skip) = unfold(x, skip) * kron(other mats)^T
  std::vector<Matrix> others;
  for (int l = 0; l < 3; ++l) {
    if (l != skip) others.push_back(mats[static_cast<std::size_t>(l)]);
  }
  const Matrix expected = unfold(x, skip) * kron_list(others).transpose();
  const Matrix got = unfold(fast, skip);
  CHECK((got - expected).norm() <= 1e-12 * std::max(1.0, expected.norm()));
}

TEST_CASE("mode product application order does not matter") {
  Rng rng(9);
  const std::vector<int> shape{2, 3, 2, 2};
  const DenseTensor x = test::random_tensor(shape, rng);
  std::vector<Matrix> mats;
  for (int d : shape) mats.push_back(test::random_spd(d, rng));

  DenseTensor forward = x;
  for (int l = 0; l < 4; ++l) {
    if (l != 2) forward = mode_product(forward, mats[static_cast<std::size_t>(l)], l);
  }
  DenseTensor backward = x;
  for (int l = 3; l >= 0; --l) {
    if (l != 2) backward = mode_product(backward, mats[static_cast<std::size_t>(l)], l);
  }
  double max_diff = 0.0;
  double scale = 0.0;
  for (std::int64_t i = 0; i < forward.size(); ++i) {
    max_diff = std::max(max_diff, std::abs(forward[i] - backward[i]));
    scale = std::max(scale, std::abs(forward[i]));
  }
  CHECK(max_diff <= 1e-12 * std::max(1.0, scale));
}

TEST_CASE("vec-Kronecker compatibility on random factors") {
  Rng rng(10);
  const std::vector<int> shape{2, 3, 2};
  const DenseTensor x = test::random_tensor(shape, rng);
  std::vector<Matrix> mats;
  for (int d : shape) mats.push_back(test::random_matrix(d, d, rng));

  DenseTensor product = x;
  for (int l = 0; l < 3; ++l) product = mode_product(product, mats[static_cast<std::size_t>(l)], l);

  const Vector via_kron = kron_list(mats) * x.vec();
  const Vector via_modes = product.vec();
  CHECK((via_kron - via_modes).norm() <= 1e-12 * std::max(1.0, via_kron.norm()));
}

TEST_CASE("flatten_series vectorizes in canonical order") {
  DenseTensor sample({2, 2}, {1, 2, 3, 4});
  TensorSeries x({2, 2}, {{sample}});
  const TensorSeries flat = flatten_series(x);
  CHECK(flat.shape() == std::vector<int>{4});
  CHECK(flat.sample(0, 0).values() == std::vector<double>{1, 2, 3, 4});
}

TEST_CASE("flattening an already flat series changes nothing") {
  Rng rng(12);
  const TensorSeries x = test::random_series({5}, 3, 2, rng);
  const TensorSeries flat = flatten_series(x);
  CHECK(flat.shape() == x.shape());
  for (int t = 0; t < x.num_steps(); ++t) {
    for (int n = 0; n < x.num_samples(t); ++n) {
      CHECK(flat.sample(t, n).values() == x.sample(t, n).values());
    }
  }
}

TEST_CASE("flattened covariance equals the covariance of the vectorized samples") {
  Rng rng(13);
  const TensorSeries x = test::random_series({2, 3}, 3, 4, rng);
  const TensorSeries flat = flatten_series(x);
  for (int t = 0; t < x.num_steps(); ++t) {
    Matrix direct = Matrix::Zero(6, 6);
    for (int n = 0; n < x.num_samples(t); ++n) {
      const auto v = x.sample(t, n).vec();
      direct += v * v.transpose();
    }
    direct /= static_cast<double>(x.num_samples(t));
    Matrix flattened = Matrix::Zero(6, 6);
    for (int n = 0; n < flat.num_samples(t); ++n) {
      const auto v = flat.sample(t, n).vec();
      flattened += v * v.transpose();
    }
    flattened /= static_cast<double>(flat.num_samples(t));
    CHECK(direct.isApprox(flattened));
  }
}

TEST_SUITE_END();
