#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "datamap/error.hpp"
#include "datamap/metrics.hpp"
#include "datamap/rng.hpp"
#include "datamap/trainer.hpp"

using namespace datamap;
using namespace datamap::trainer;

namespace {

SyntheticSpec easy_spec() {
    SyntheticSpec spec;
    spec.n_per_class = 30;
    spec.k_classes = 2;
    spec.overlap = 0.1;  // margin of 10 cluster stds: linearly separable in practice
    spec.seed = 5;
    return spec;
}

}  // namespace

TEST_CASE("gen_synthetic produces the documented shape") {
    SyntheticSpec spec;
    spec.n_per_class = 10;
    spec.k_classes = 3;
    spec.seed = 1;
    const auto d = gen_synthetic(spec);

    CHECK(d.dim == 3);  // max(2, k)
    CHECK(d.num_classes == 3);
    const auto train = d.split_indices(SplitTag::train);
    const auto dev = d.split_indices(SplitTag::dev);
    const auto ood = d.split_indices(SplitTag::ood);
    CHECK(train.size() == 30);
    CHECK(dev.size() == 15);  // n_per_class/2 per class
    CHECK(ood.size() == 15);
    CHECK(d.size() == 60);
    CHECK_NOTHROW(validate_dataset(d));

    // labels are balanced round-robin within each split
    std::vector<int> counts(3, 0);
    for (auto i : train) ++counts[static_cast<std::size_t>(d.labels[i])];
    CHECK(counts == std::vector<int>{10, 10, 10});

    // two-class data still lives in two dimensions
    SyntheticSpec two = spec;
    two.k_classes = 2;
    CHECK(gen_synthetic(two).dim == 2);
}

TEST_CASE("gen_synthetic is seed-deterministic") {
    const auto a = gen_synthetic(easy_spec());
    const auto b = gen_synthetic(easy_spec());
    CHECK(a.features == b.features);
    CHECK(a.labels == b.labels);
    CHECK(a.instance_ids == b.instance_ids);

    auto other = easy_spec();
    other.seed = 6;
    CHECK(gen_synthetic(other).features != a.features);
}

TEST_CASE("gen_synthetic validates its spec") {
    SyntheticSpec spec;
    spec.k_classes = 1;
    CHECK_THROWS_AS(gen_synthetic(spec), ValidationError);
    spec.k_classes = 9;
    CHECK_THROWS_AS(gen_synthetic(spec), ValidationError);
    spec = SyntheticSpec{};
    spec.overlap = -0.1;
    CHECK_THROWS_AS(gen_synthetic(spec), ValidationError);
    spec = SyntheticSpec{};
    spec.flip_fraction = 1.0;
    CHECK_THROWS_AS(gen_synthetic(spec), ValidationError);
    spec = SyntheticSpec{};
    spec.n_per_class = 0;
    CHECK_THROWS_AS(gen_synthetic(spec), ValidationError);
}

TEST_CASE("flip_fraction flips exactly ceil(fraction*train) labels, train only") {
    auto spec = easy_spec();
    spec.n_per_class = 50;
    spec.flip_fraction = 0.1;
    const auto d = gen_synthetic(spec);
    REQUIRE(d.true_labels.size() == d.size());

    std::size_t train_flips = 0, other_flips = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d.labels[i] == d.true_labels[i]) continue;
        if (d.splits[i] == SplitTag::train)
            ++train_flips;
        else
            ++other_flips;
    }
    CHECK(train_flips == 10);  // ceil(0.1 * 100)
    CHECK(other_flips == 0);
}

TEST_CASE("without flips the labels are their own ground truth") {
    const auto d = gen_synthetic(easy_spec());
    CHECK(d.true_labels == d.labels);
}

TEST_CASE("ood_shift moves the ood split only") {
    auto base = easy_spec();
    base.ood_shift = 0.0;
    auto shifted = base;
    shifted.ood_shift = 2.0;
    const auto d0 = gen_synthetic(base);
    const auto d1 = gen_synthetic(shifted);

    // same draws, so train and dev are bit-identical; ood features moved
    const auto ood = d0.split_indices(SplitTag::ood);
    double delta0 = 0.0, delta1 = 0.0;
    for (auto i : ood) {
        delta0 += d1.row(i)[0] - d0.row(i)[0];
        delta1 += d1.row(i)[1] - d0.row(i)[1];
    }
    const double n = static_cast<double>(ood.size());
    CHECK(delta0 / n == doctest::Approx(-2.0 / std::sqrt(2.0)).epsilon(1e-9));
    CHECK(delta1 / n == doctest::Approx(2.0 / std::sqrt(2.0)).epsilon(1e-9));

    for (auto i : d0.split_indices(SplitTag::train))
        CHECK(d1.row(i)[0] == d0.row(i)[0]);
}

TEST_CASE("annotators draw from the class posterior") {
    auto spec = easy_spec();
    spec.n_per_class = 40;
    spec.annotators = 5;
    const auto d = gen_synthetic(spec);
    REQUIRE(d.num_annotators == 5);
    REQUIRE(d.annotations.size() == d.size() * 5);

    // overlap 0.1: the posterior is near-degenerate, so annotators almost
    // always agree with the generating label
    std::size_t agree = 0;
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t a = 0; a < 5; ++a)
            if (d.annotations[i * 5 + a] == d.labels[i]) ++agree;
    CHECK(static_cast<double>(agree) / static_cast<double>(d.size() * 5) > 0.99);

    // high overlap: annotators must start disagreeing
    spec.overlap = 2.0;
    const auto noisy = gen_synthetic(spec);
    std::size_t disagree = 0;
    for (std::size_t i = 0; i < noisy.size(); ++i)
        for (std::size_t a = 0; a < 5; ++a)
            if (noisy.annotations[i * 5 + a] != noisy.labels[i]) ++disagree;
    CHECK(disagree > 0);
}

TEST_CASE("validate_dataset catches structural defects") {
    auto d = gen_synthetic(easy_spec());
    SUBCASE("duplicate id") {
        d.instance_ids[1] = d.instance_ids[0];
        CHECK_THROWS_AS(validate_dataset(d), ValidationError);
    }
    SUBCASE("label out of range") {
        d.labels[0] = 7;
        CHECK_THROWS_AS(validate_dataset(d), ValidationError);
    }
    SUBCASE("non-finite feature") {
        d.features[3] = std::nan("");
        CHECK_THROWS_AS(validate_dataset(d), ValidationError);
    }
    SUBCASE("size mismatch") {
        d.labels.pop_back();
        CHECK_THROWS_AS(validate_dataset(d), ValidationError);
    }
}

TEST_CASE("validate_config rejects bad settings") {
    TrainConfig c;
    c.epochs = 0;
    CHECK_THROWS_AS(validate_config(c), ValidationError);
    c = TrainConfig{};
    c.batch_size = 0;
    CHECK_THROWS_AS(validate_config(c), ValidationError);
    c = TrainConfig{};
    c.learning_rate = 0.0;
    CHECK_THROWS_AS(validate_config(c), ValidationError);
    c = TrainConfig{};
    c.dropout_rate = 0.2;  // linear has no hidden units to mask
    CHECK_THROWS_AS(validate_config(c), ValidationError);
    c = TrainConfig{};
    c.family = Family::mlp;
    c.dropout_rate = 1.0;
    CHECK_THROWS_AS(validate_config(c), ValidationError);
    c = TrainConfig{};
    c.family = Family::mlp;
    c.hidden_layers = 3;
    CHECK_THROWS_AS(validate_config(c), ValidationError);
    c = TrainConfig{};
    c.family = Family::mlp;
    c.hidden_width = 0;
    CHECK_THROWS_AS(validate_config(c), ValidationError);
}

TEST_CASE("param_count matches the layer layout") {
    TrainConfig linear;
    CHECK(param_count(linear, 4, 3) == 4 * 3 + 3);

    TrainConfig mlp;
    mlp.family = Family::mlp;
    mlp.hidden_width = 8;
    mlp.hidden_layers = 1;
    CHECK(param_count(mlp, 4, 3) == (4 * 8 + 8) + (8 * 3 + 3));
    mlp.hidden_layers = 2;
    CHECK(param_count(mlp, 4, 3) == (4 * 8 + 8) + (8 * 8 + 8) + (8 * 3 + 3));
}

TEST_CASE("init_model is seeded, bounded, and zero-biased") {
    const auto d = gen_synthetic(easy_spec());
    TrainConfig c;
    c.family = Family::mlp;
    c.hidden_width = 8;
    c.seed = 3;
    const auto m1 = init_model(d, c);
    const auto m2 = init_model(d, c);
    CHECK(m1.params == m2.params);
    CHECK(m1.params.size() == param_count(c, d.dim, d.num_classes));

    c.seed = 4;
    CHECK(init_model(d, c).params != m1.params);

    // first layer weights bounded by 1/sqrt(dim); biases at the layer tail are zero
    const double bound = 1.0 / std::sqrt(static_cast<double>(d.dim));
    const std::size_t w0 = d.dim * 8;
    for (std::size_t i = 0; i < w0; ++i) {
        CHECK(m1.params[i] >= -bound);
        CHECK(m1.params[i] <= bound);
    }
    for (std::size_t i = w0; i < w0 + 8; ++i) CHECK(m1.params[i] == 0.0);
}

TEST_CASE("predict_probs is a distribution") {
    const auto d = gen_synthetic(easy_spec());
    for (Family f : {Family::linear, Family::mlp}) {
        TrainConfig c;
        c.family = f;
        const auto model = init_model(d, c);
        for (std::size_t i = 0; i < 5; ++i) {
            const auto p = predict_probs(model, d.row(i));
            REQUIRE(p.size() == 2);
            double sum = 0.0;
            for (double v : p) {
                CHECK(v >= 0.0);
                sum += v;
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("analytic gradient matches central differences") {
    auto spec = easy_spec();
    spec.n_per_class = 6;
    spec.overlap = 0.8;
    const auto d = gen_synthetic(spec);
    const auto idx = d.split_indices(SplitTag::train);

    for (Family f : {Family::linear, Family::mlp}) {
        TrainConfig c;
        c.family = f;
        c.hidden_width = 5;
        c.seed = 11;
        auto model = init_model(d, c);
        std::vector<double> grad;
        loss_and_grad(model, d, idx, grad);
        REQUIRE(grad.size() == model.params.size());

        const double h = 1e-5;
        Rng pick(77);
        std::vector<double> dummy;
        for (int t = 0; t < 10; ++t) {
            const auto j = static_cast<std::size_t>(pick.uniform_int(model.params.size()));
            const double kept = model.params[j];
            model.params[j] = kept + h;
            const double up = loss_and_grad(model, d, idx, dummy);
            model.params[j] = kept - h;
            const double down = loss_and_grad(model, d, idx, dummy);
            model.params[j] = kept;
            const double numeric = (up - down) / (2.0 * h);
            const double denom = std::max({std::abs(numeric), std::abs(grad[j]), 1e-8});
            CHECK(std::abs(numeric - grad[j]) / denom < 1e-4);
        }
    }
}

TEST_CASE("train is deterministic and logs a complete grid") {
    const auto d = gen_synthetic(easy_spec());
    TrainConfig c;
    c.epochs = 4;
    c.seed = 9;
    const auto r1 = train(d, c);
    const auto r2 = train(d, c);
    CHECK(r1.log == r2.log);
    CHECK(r1.model.params == r2.model.params);
    CHECK(r1.epoch_mean_loss == r2.epoch_mean_loss);

    CHECK(r1.log.num_epochs() == 4);
    CHECK(r1.log.num_instances() == 60);
    CHECK(dynlog::validate(r1.log).empty());
    CHECK(r1.epoch_mean_loss.size() == 4);

    // the log covers exactly the train split, canonical order
    auto train_ids = std::vector<std::string>{};
    for (auto i : d.split_indices(SplitTag::train)) train_ids.push_back(d.instance_ids[i]);
    std::sort(train_ids.begin(), train_ids.end());
    CHECK(r1.log.instance_ids() == train_ids);
}

TEST_CASE("training separates an easy dataset") {
    const auto d = gen_synthetic(easy_spec());
    TrainConfig c;
    c.epochs = 8;
    c.learning_rate = 0.05;
    const auto r = train(d, c);
    CHECK(evaluate(r.model, d, SplitTag::train) >= 0.95);
    CHECK(evaluate(r.model, d, SplitTag::dev) >= 0.95);
    CHECK(r.epoch_mean_loss.back() < r.epoch_mean_loss.front());

    // on easy data the map collapses into the high-confidence corner
    const auto table = metrics::compute_table(r.log);
    double mean_conf = 0.0;
    for (const auto& row : table.rows) mean_conf += row.confidence;
    CHECK(mean_conf / static_cast<double>(table.size()) > 0.8);
}

TEST_CASE("the last epoch record reflects the final model") {
    const auto d = gen_synthetic(easy_spec());
    TrainConfig c;
    c.epochs = 5;
    c.seed = 2;
    const auto r = train(d, c);
    const int last = r.log.num_epochs() - 1;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < r.log.num_instances(); ++i) {
        const auto& rec = r.log.record(i, last);
        CHECK(metrics::is_correct(rec) ==
              (metrics::argmax_lowest(predict_probs(r.model, d.row(d.index_of(rec.instance_id)))) ==
               rec.gold));
        if (metrics::is_correct(rec)) ++correct;
    }
    const double frac = static_cast<double>(correct) / static_cast<double>(r.log.num_instances());
    CHECK(evaluate(r.model, d, SplitTag::train) == doctest::Approx(frac).epsilon(1e-12));
}

TEST_CASE("mlp with dropout trains and stays deterministic") {
    const auto d = gen_synthetic(easy_spec());
    TrainConfig c;
    c.family = Family::mlp;
    c.hidden_width = 8;
    c.dropout_rate = 0.3;
    c.epochs = 6;
    c.learning_rate = 0.02;
    c.seed = 13;
    const auto r1 = train(d, c);
    const auto r2 = train(d, c);
    CHECK(r1.model.params == r2.model.params);
    CHECK(evaluate(r1.model, d, SplitTag::dev) >= 0.9);
}

TEST_CASE("dropout_sample behavior") {
    const auto d = gen_synthetic(easy_spec());
    TrainConfig c;
    c.family = Family::mlp;
    c.hidden_width = 8;
    c.epochs = 3;
    const auto r = train(d, c);

    SUBCASE("samples are seed-deterministic and shaped correctly") {
        const auto s1 = dropout_sample(r.model, d, SplitTag::train, 7, 0.4, 21);
        const auto s2 = dropout_sample(r.model, d, SplitTag::train, 7, 0.4, 21);
        CHECK(s1.instance_ids == s2.instance_ids);
        CHECK(s1.p_gold == s2.p_gold);
        REQUIRE(s1.instance_ids.size() == 60);
        CHECK(std::is_sorted(s1.instance_ids.begin(), s1.instance_ids.end()));
        for (const auto& row : s1.p_gold) {
            REQUIRE(row.size() == 7);
            for (double p : row) {
                CHECK(p >= 0.0);
                CHECK(p <= 1.0);
            }
        }
    }
    SUBCASE("rate zero collapses to the deterministic forward pass") {
        const auto s = dropout_sample(r.model, d, SplitTag::train, 3, 0.0, 21);
        for (std::size_t i = 0; i < s.instance_ids.size(); ++i) {
            const auto di = d.index_of(s.instance_ids[i]);
            const double p =
                predict_probs(r.model, d.row(di))[static_cast<std::size_t>(d.labels[di])];
            for (double v : s.p_gold[i]) CHECK(v == doctest::Approx(p).epsilon(1e-15));
        }
    }
    SUBCASE("masks actually perturb the outputs") {
        const auto s = dropout_sample(r.model, d, SplitTag::train, 5, 0.5, 21);
        bool varied = false;
        for (const auto& row : s.p_gold)
            for (double v : row)
                if (v != row[0]) varied = true;
        CHECK(varied);
    }
    SUBCASE("a linear model cannot dropout-sample") {
        TrainConfig lin;
        const auto lr = train(d, lin);
        CHECK_THROWS_AS(dropout_sample(lr.model, d, SplitTag::train, 3, 0.5, 1), ValidationError);
    }
}

TEST_CASE("restrict_to_ids keeps eval splits and filters train") {
    const auto d = gen_synthetic(easy_spec());
    std::vector<std::string> keep;
    for (auto i : d.split_indices(SplitTag::train))
        if (keep.size() < 10) keep.push_back(d.instance_ids[i]);

    const auto sub = restrict_to_ids(d, keep);
    CHECK(sub.split_indices(SplitTag::train).size() == 10);
    CHECK(sub.split_indices(SplitTag::dev).size() == d.split_indices(SplitTag::dev).size());
    CHECK(sub.split_indices(SplitTag::ood).size() == d.split_indices(SplitTag::ood).size());
    CHECK_NOTHROW(validate_dataset(sub));

    SUBCASE("unknown id is named in the error") {
        CHECK_THROWS_WITH_AS(restrict_to_ids(d, {"zz9999"}), doctest::Contains("zz9999"),
                             ValidationError);
    }
    SUBCASE("dev ids are not train instances") {
        const auto dev0 = d.instance_ids[d.split_indices(SplitTag::dev)[0]];
        CHECK_THROWS_AS(restrict_to_ids(d, {dev0}), ValidationError);
    }
}

TEST_CASE("dataset files round-trip exactly") {
    auto spec = easy_spec();
    spec.n_per_class = 12;
    spec.flip_fraction = 0.1;
    spec.annotators = 3;
    spec.ood_shift = 1.0;
    const auto d = gen_synthetic(spec);
    const auto back = parse_dataset(write_dataset(d));
    CHECK(back.dim == d.dim);
    CHECK(back.num_classes == d.num_classes);
    CHECK(back.instance_ids == d.instance_ids);
    CHECK(back.features == d.features);
    CHECK(back.labels == d.labels);
    CHECK(back.true_labels == d.true_labels);
    CHECK(back.annotations == d.annotations);
    CHECK(back.num_annotators == d.num_annotators);
    CHECK(back.splits == d.splits);
}

TEST_CASE("parse_dataset rejects a mangled header") {
    const auto d = gen_synthetic(easy_spec());
    auto text = write_dataset(d);
    text.erase(0, text.find('\n') + 1);  // drop the "# D=.. K=.." line
    CHECK_THROWS_AS(parse_dataset(text), ParseError);
}
