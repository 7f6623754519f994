// Copyright 2026 The mcs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Bags from two Gaussian classes, paired, trained on, and scored on held-out
// points whose labels the learner never saw.

#include <iostream>
#include <vector>

#include "mcs/mcs.hpp"

int main() {
  const mcs::Dataset data = mcs::synth_gaussians(2, 4.0, 500, 1);
  const auto [train, test] = mcs::split(data, 0.8, 2);

  std::vector<mcs::Bag> bags = mcs::make_bags(train, 8, 3);
  if (bags.size() % 2) bags.pop_back();
  for (mcs::Bag& b : bags) b.hidden_labels.reset();

  const mcs::Pairing pairing = mcs::pair_bags(bags);
  const std::vector<mcs::Unit> units = mcs::llp_units(pairing.pairs);
  std::cout << bags.size() << " bags, " << units.size() << " usable pairs, matching objective "
            << pairing.objective << "\n";

  const mcs::HyperParams hp{0.1, 0.001, 800, 0.001, 0.5};
  const mcs::KernelModel model = mcs::fit_units(units, hp, mcs::MarginLoss::logistic());

  const Eigen::VectorXd f = mcs::evaluate_all(model, test.features);
  const std::vector<double> fv(f.data(), f.data() + f.size());
  std::cout << "test balanced accuracy " << mcs::balanced_accuracy(fv, *test.labels) << " (Bayes "
            << 1.0 - mcs::bayes_ber(4.0) << ")\n";
  return 0;
}
