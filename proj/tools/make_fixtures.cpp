// Regenerates the crane and dust-proof-net field-case fixtures.
//
//   make_fixtures <output-dir>
//
// Writes <output-dir>/crane/ and <output-dir>/net/ and prints the IoU and
// cosine actually realised by the generated files next to the targets.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>

#include "foi/fixtures.hpp"

namespace {

void report(const foi::fixtures::CaseFixture& fx) {
  std::printf("%s (%s)\n", fx.name.c_str(), fx.label.c_str());
  for (std::size_t k = 0; k + 1 < fx.frames.size(); ++k) {
    const auto& a = fx.frames[k].detections.front();
    const auto& b = fx.frames[k + 1].detections.front();
    std::printf("  %zu-%zu  iou %.4f (target %.4f)  cos %.4f (target %.4f)\n", k + 1, k + 2,
                foi::iou(a.box, b.box), fx.ious[k], foi::cosine_similarity(a.embedding, b.embedding),
                fx.cosines[k]);
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <output-dir>\n";
    return 1;
  }
  const std::string root = argv[1];
  for (const auto& fx : {foi::fixtures::crane_fixture(), foi::fixtures::net_fixture()}) {
    foi::fixtures::write_case(fx, root + "/" + fx.name);
    report(fx);
  }
  return 0;
}
