#include <iostream>

#include "CLI11.hpp"
#include "mbti/synthetic.hpp"
#include "mbti/util/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"writes the bundled synthetic demo corpus"};
  std::string out = "resources/data/synthetic_mbti.csv";
  mbti::SyntheticConfig config;
  app.add_option("--out", out, "output CSV path");
  app.add_option("--records", config.n_records, "number of records");
  app.add_option("--seed", config.seed, "generator seed");
  CLI11_PARSE(app, argc, argv);

  mbti::write_text_file(out, mbti::synthetic_corpus_csv(config));
  std::cout << "wrote " << config.n_records << " records to " << out << "\n";
  return 0;
}
