// Synthesize a small corpus, then classify static vs moving scenes.
#include <csisense/csisense.hpp>

#include <iostream>

int main() {
  using namespace csisense;

  CorpusSpec spec;
  spec.config.F = 20;
  spec.config.M = 16;
  spec.config.N = 600;
  spec.config.seed = 7;
  spec.counts = {18, 18, 18, 18, 18};

  const Dataset d = generate_corpus(spec);
  const CaseSpec case1 = builtin_case(1);

  for (auto kind : {ModelKind::Svm, ModelKind::Nn}) {
    const RunReport r = run_case(d, case1, kind, std::nullopt, /*seed=*/1);
    std::cout << report_to_text(r) << "\n";
  }

  const auto three = run_case(d, case1, ModelKind::Svm, first_antennas(3), 1);
  std::cout << "first three chains only: accuracy " << three.accuracy << "\n";
}
