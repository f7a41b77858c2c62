#include "irmlab/train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "irmlab/rng.hpp"

namespace irmlab {

std::string method_name(Method method) {
  switch (method) {
    case Method::ERM: return "erm";
    case Method::IRM: return "irm";
    case Method::IRMBAL: return "irmbal";
    case Method::MMD: return "mmd";
    case Method::ACDM: return "acdm";
    case Method::IRM_MMD: return "irm_mmd";
    case Method::IRM_ACDM: return "irm_acdm";
  }
  return "?";
}

std::optional<Method> method_from_name(const std::string& name) {
  for (Method m : {Method::ERM, Method::IRM, Method::IRMBAL, Method::MMD,
                   Method::ACDM, Method::IRM_MMD, Method::IRM_ACDM})
    if (method_name(m) == name) return m;
  return std::nullopt;
}

bool method_uses_irm(Method m) {
  return m == Method::IRM || m == Method::IRMBAL || m == Method::IRM_MMD ||
         m == Method::IRM_ACDM;
}
bool method_uses_mmd(Method m) {
  return m == Method::MMD || m == Method::IRM_MMD;
}
bool method_uses_acdm(Method m) {
  return m == Method::ACDM || m == Method::IRM_ACDM;
}

const Checkpoint& select_model(std::span<const Checkpoint> checkpoints) {
  if (checkpoints.empty())
    throw std::invalid_argument("select_model: no checkpoints");
  const Checkpoint* best = &checkpoints[0];
  for (const Checkpoint& c : checkpoints)
    if (c.val_loss < best->val_loss) best = &c;  // ties keep the earliest
  return *best;
}

ModelEval model_forward(const Mlp& model, const Matrix& x, LossKind kind) {
  Mlp::Cache cache;
  model.forward(x, cache);
  ModelEval eval;
  eval.representation = cache.representation();
  eval.outputs.resize(x.rows);
  for (int i = 0; i < x.rows; ++i) {
    const double z = cache.output().at(i, 0);
    eval.outputs[i] = kind == LossKind::BCE ? sigmoid(z) : z;
  }
  return eval;
}

namespace {

struct EnvSlice {
  int env_id = 0;
  int begin = 0;  // row range in the stacked representation matrix
  int end = 0;
};

// Group index over stacked batch rows, optionally capped per group.
GroupIndex build_groups(const StepBatches& batches, int cap) {
  GroupIndex groups;
  int row = 0;
  for (std::size_t e = 0; e < batches.x.size(); ++e) {
    for (std::size_t i = 0; i < batches.y[e].size(); ++i, ++row) {
      auto& rows = groups[{batches.y[e][i] ? 1 : 0, batches.env_ids[e]}];
      if (cap <= 0 || static_cast<int>(rows.size()) < cap) rows.push_back(row);
    }
  }
  return groups;
}

}  // namespace

double composed_loss(const Mlp& model, const Discriminator* disc,
                     const StepBatches& batches, const ComposedLossSpec& spec,
                     std::vector<double>* model_grad,
                     std::vector<ComposedLossSpec::EnvTerms>* env_terms,
                     double* cdm_value) {
  if (batches.x.empty()) throw std::invalid_argument("composed_loss: no batches");
  const int n_envs = static_cast<int>(batches.x.size());
  const int rep_dim = model.representation_width();

  // Forward every environment batch and stack the representations.
  std::vector<Mlp::Cache> caches(n_envs);
  std::vector<EnvBatch> env_batches(n_envs);
  std::vector<EnvSlice> slices(n_envs);
  int total_rows = 0;
  for (int e = 0; e < n_envs; ++e) total_rows += batches.x[e].rows;
  Matrix reps(total_rows, rep_dim);
  std::vector<std::uint8_t> labels_all(total_rows);
  int row = 0;
  for (int e = 0; e < n_envs; ++e) {
    model.forward(batches.x[e], caches[e]);
    const int n = batches.x[e].rows;
    slices[e] = {batches.env_ids[e], row, row + n};
    EnvBatch& batch = env_batches[e];
    batch.env_id = batches.env_ids[e];
    batch.labels = batches.y[e];
    batch.outputs.resize(n);
    for (int i = 0; i < n; ++i) {
      const double z = caches[e].output().at(i, 0);
      batch.outputs[i] = spec.kind == LossKind::BCE ? sigmoid(z) : z;
      std::copy_n(caches[e].representation().row(i), rep_dim, reps.row(row));
      labels_all[row] = batches.y[e][i];
      ++row;
    }
  }

  if (env_terms) env_terms->assign(n_envs, {});
  double total = 0.0;
  for (int e = 0; e < n_envs; ++e) {
    const double r = risk(env_batches[e], spec.kind);
    const double pen = irm_penalty(env_batches[e], spec.kind, spec.granularity);
    if (env_terms) (*env_terms)[e] = {r, pen};
    total += r + spec.alpha * pen;
  }

  // Conditional matching term over the stacked representations.
  Matrix d_reps;
  if (model_grad && (spec.use_mmd || spec.use_acdm))
    d_reps = Matrix(total_rows, rep_dim);
  double cdm = 0.0;
  if (spec.use_mmd) {
    GroupIndex groups = build_groups(batches, spec.group_cap);
    CdmPenaltyResult res =
        cdm_mmd_penalty(reps, groups, spec.kernel,
                        model_grad ? &d_reps : nullptr, spec.beta,
                        spec.normalized_pairs);
    cdm = res.value;
  } else if (spec.use_acdm) {
    if (!disc)
      throw std::invalid_argument("composed_loss: ACDM needs a discriminator");
    GroupIndex groups = build_groups(batches, 0);
    std::map<GroupKey, int> group_sizes;
    for (const auto& [key, rows] : groups)
      group_sizes[key] = static_cast<int>(rows.size());
    // Environment column = position of the instance's environment in the
    // batch order (the discriminator's output order).
    std::vector<int> env_col(total_rows);
    std::vector<GroupKey> group_of(total_rows);
    for (int e = 0; e < n_envs; ++e)
      for (int i = slices[e].begin; i < slices[e].end; ++i) {
        env_col[i] = e;
        group_of[i] = {labels_all[i] ? 1 : 0, slices[e].env_id};
      }
    Mlp::Cache dcache;
    Matrix logits = disc->logits(reps, labels_all, dcache);
    Matrix d_logits;
    if (model_grad) d_logits = Matrix(total_rows, logits.cols);
    cdm = acdm_objective(logits, env_col, group_of, spec.gamma, group_sizes,
                         model_grad ? &d_logits : nullptr);
    if (model_grad) {
      for (double& g : d_logits.data) g *= spec.beta;
      std::vector<double> disc_scratch(disc->net().n_params(), 0.0);
      disc->backward(dcache, d_logits, disc_scratch, &d_reps);
    }
  }
  total += spec.beta * cdm;
  if (cdm_value) *cdm_value = cdm;

  if (model_grad) {
    for (int e = 0; e < n_envs; ++e) {
      const EnvBatch& batch = env_batches[e];
      const int n = static_cast<int>(batch.outputs.size());
      std::vector<double> d_out_v = risk_grad(batch, spec.kind);
      if (spec.alpha != 0.0) {
        std::vector<double> d_pen =
            irm_penalty_grad(batch, spec.kind, spec.granularity);
        for (int i = 0; i < n; ++i) d_out_v[i] += spec.alpha * d_pen[i];
      }
      Matrix d_out(n, 1);
      for (int i = 0; i < n; ++i) {
        double g = d_out_v[i];
        if (spec.kind == LossKind::BCE) {
          const double p = batch.outputs[i];
          g *= p * (1.0 - p);  // chain through the output squashing
        }
        d_out.at(i, 0) = g;
      }
      Matrix d_rep_slice;
      const Matrix* d_rep_ptr = nullptr;
      if (d_reps.rows > 0) {
        d_rep_slice = Matrix(n, rep_dim);
        for (int i = 0; i < n; ++i)
          std::copy_n(d_reps.row(slices[e].begin + i), rep_dim,
                      d_rep_slice.row(i));
        d_rep_ptr = &d_rep_slice;
      }
      model.backward(caches[e], d_out, d_rep_ptr, *model_grad);
    }
  }
  return total;
}

double discriminator_objective(const Mlp& model, const Discriminator& disc,
                               const StepBatches& batches,
                               const ComposedLossSpec& spec,
                               std::vector<double>* disc_grad) {
  const int n_envs = static_cast<int>(batches.x.size());
  const int rep_dim = model.representation_width();
  int total_rows = 0;
  for (const Matrix& x : batches.x) total_rows += x.rows;
  Matrix reps(total_rows, rep_dim);
  std::vector<std::uint8_t> labels_all(total_rows);
  std::vector<int> env_col(total_rows);
  std::vector<GroupKey> group_of(total_rows);
  int row = 0;
  for (int e = 0; e < n_envs; ++e) {
    Mlp::Cache cache;
    model.forward(batches.x[e], cache);
    for (int i = 0; i < batches.x[e].rows; ++i, ++row) {
      std::copy_n(cache.representation().row(i), rep_dim, reps.row(row));
      labels_all[row] = batches.y[e][i];
      env_col[row] = e;
      group_of[row] = {batches.y[e][i] ? 1 : 0, batches.env_ids[e]};
    }
  }
  std::map<GroupKey, int> group_sizes;
  for (int i = 0; i < total_rows; ++i) group_sizes[group_of[i]] += 1;

  Mlp::Cache dcache;
  Matrix logits = disc.logits(reps, labels_all, dcache);
  Matrix d_logits;
  if (disc_grad) d_logits = Matrix(total_rows, logits.cols);
  const double value =
      acdm_objective(logits, env_col, group_of, spec.gamma, group_sizes,
                     disc_grad ? &d_logits : nullptr);
  if (disc_grad) disc.backward(dcache, d_logits, *disc_grad, nullptr);
  return value;
}

namespace {

struct EnvTrainData {
  int env_id = 0;
  std::vector<const Instance*> train;
};

Matrix features_of(std::span<const Instance* const> rows) {
  Matrix x(static_cast<int>(rows.size()), EncodingConfig::kFeatureWidth);
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy_n(rows[i]->features.data(), EncodingConfig::kFeatureWidth,
                x.row(static_cast<int>(i)));
  return x;
}

double accuracy_of(const Mlp& model, std::span<const Instance* const> rows,
                   LossKind kind) {
  if (rows.empty()) return 0.0;
  Matrix x = features_of(rows);
  ModelEval eval = model_forward(model, x, kind);
  long correct = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int pred = eval.outputs[i] > 0.5 ? 1 : 0;
    correct += pred == rows[i]->y;
  }
  return static_cast<double>(correct) / static_cast<double>(rows.size());
}

}  // namespace

RunResult train_run(const Dataset& ds_in, const TrainConfig& cfg) {
  if (cfg.alpha < 0 || cfg.beta < 0 || cfg.k_irm < 0)
    throw std::invalid_argument("train_run: negative penalty configuration");
  if (method_uses_acdm(cfg.method) && cfg.d_steps < 1)
    throw std::invalid_argument("train_run: ACDM methods need d_steps >= 1");
  if (cfg.batch_size < 1 || cfg.iterations < 1 || cfg.checkpoint_every < 1)
    throw std::invalid_argument("train_run: invalid iteration configuration");

  Dataset balanced_ds;
  const Dataset* ds = &ds_in;
  if (cfg.method == Method::IRMBAL) {
    balanced_ds = balance_labels(ds_in, cfg.seed);
    ds = &balanced_ds;
  }

  // Loss paths only ever see Train-split rows of training environments; the
  // test environment feeds nothing but the final accuracy numbers.
  std::vector<EnvTrainData> env_data;
  std::vector<const Instance*> val_rows, train_rows_all, test_rows;
  for (const auto& env : ds->envs) {
    if (env.is_test) {
      for (const Instance& inst : env.instances) test_rows.push_back(&inst);
      continue;
    }
    EnvTrainData data;
    data.env_id = env.env_id;
    for (const Instance& inst : env.instances) {
      if (inst.split == Split::Train) {
        data.train.push_back(&inst);
        train_rows_all.push_back(&inst);
      } else if (inst.split == Split::Val) {
        val_rows.push_back(&inst);
      }
    }
    if (data.train.empty())
      throw std::invalid_argument("train_run: environment " +
                                  std::to_string(env.env_id) +
                                  " has an empty training split");
    env_data.push_back(std::move(data));
  }
  if (env_data.empty())
    throw std::invalid_argument("train_run: no training environments");
  for (const auto& data : env_data)
    for (const Instance* inst : data.train)
      if (inst->split != Split::Train)
        throw std::logic_error("train_run: non-train instance in a batch pool");

  const double alpha_eff = method_uses_irm(cfg.method) ? cfg.alpha : 0.0;
  const double beta_eff =
      (method_uses_mmd(cfg.method) || method_uses_acdm(cfg.method)) ? cfg.beta
                                                                    : 0.0;

  std::vector<int> sizes{EncodingConfig::kFeatureWidth};
  for (int h : cfg.hidden) sizes.push_back(h);
  sizes.push_back(1);
  Mlp model(sizes, cfg.seed, "model_init");

  Discriminator disc;
  if (method_uses_acdm(cfg.method))
    disc = Discriminator(model.representation_width(), 2,
                         static_cast<int>(env_data.size()), cfg.disc_hidden,
                         cfg.seed);

  GammaWeights gamma;
  if (method_uses_acdm(cfg.method)) gamma = gamma_weights(*ds);

  std::vector<RngStream> batch_streams;
  for (const auto& data : env_data)
    batch_streams.emplace_back(cfg.seed, "batches", data.env_id);

  RunResult result;
  result.seed = cfg.seed;

  // Validation risk for selection (risk only unless configured otherwise).
  auto validation_loss = [&](const Mlp& m) {
    double loss = 0.0;
    for (const auto& data : env_data) {
      std::vector<const Instance*> rows;
      for (const Instance* inst : val_rows)
        if (inst->env_id == data.env_id) rows.push_back(inst);
      if (rows.empty()) continue;
      Matrix x = features_of(rows);
      ModelEval eval = model_forward(m, x, cfg.loss_kind);
      EnvBatch batch;
      batch.env_id = data.env_id;
      batch.outputs = eval.outputs;
      for (const Instance* inst : rows) batch.labels.push_back(inst->y);
      loss += risk(batch, cfg.loss_kind);
      if (cfg.val_loss_includes_penalty && alpha_eff > 0)
        loss += alpha_eff * irm_penalty(batch, cfg.loss_kind, cfg.granularity);
    }
    return loss;
  };

  const int eligible_from =
      (method_uses_irm(cfg.method) && alpha_eff > 0) ? cfg.k_irm : 0;
  std::vector<double> grad(model.n_params());
  std::vector<double> velocity(model.n_params(), 0.0);
  std::vector<double> disc_grad;
  std::vector<double> disc_velocity;
  if (method_uses_acdm(cfg.method)) {
    disc_grad.assign(disc.net().n_params(), 0.0);
    disc_velocity.assign(disc.net().n_params(), 0.0);
  }

  std::vector<double> best_params;
  int best_iteration = -1;
  double best_val = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    StepBatches batches;
    for (std::size_t e = 0; e < env_data.size(); ++e) {
      const auto& pool = env_data[e].train;
      std::vector<const Instance*> picked(cfg.batch_size);
      for (int i = 0; i < cfg.batch_size; ++i)
        picked[i] = pool[batch_streams[e].uniform_int(
            static_cast<std::uint32_t>(pool.size()))];
      batches.env_ids.push_back(env_data[e].env_id);
      batches.x.push_back(features_of(picked));
      std::vector<std::uint8_t> y(picked.size());
      for (std::size_t i = 0; i < picked.size(); ++i) y[i] = picked[i]->y;
      batches.y.push_back(std::move(y));
    }

    ComposedLossSpec spec;
    spec.kind = cfg.loss_kind;
    spec.alpha = iter >= cfg.k_irm ? alpha_eff : 0.0;
    spec.beta = beta_eff;
    spec.granularity = cfg.granularity;
    spec.use_mmd = method_uses_mmd(cfg.method) && beta_eff > 0;
    spec.use_acdm = method_uses_acdm(cfg.method) && beta_eff > 0;
    spec.normalized_pairs = cfg.cdm_normalized_pairs;
    spec.group_cap = cfg.mmd_group_cap;
    spec.gamma = gamma;

    if (spec.use_mmd) {
      // Median-heuristic bandwidths from this step's capped groups, held
      // constant inside the step.
      GroupIndex groups = build_groups(batches, spec.group_cap);
      std::vector<int> rows;
      for (const auto& [key, idx] : groups)
        rows.insert(rows.end(), idx.begin(), idx.end());
      Matrix stacked(0, 0);
      {
        int rep_dim = model.representation_width();
        Matrix all_reps(0, 0);
        // forward once to get representations for the heuristic
        int total = 0;
        for (const Matrix& x : batches.x) total += x.rows;
        all_reps = Matrix(total, rep_dim);
        int row = 0;
        for (std::size_t e = 0; e < batches.x.size(); ++e) {
          Mlp::Cache cache;
          model.forward(batches.x[e], cache);
          for (int i = 0; i < batches.x[e].rows; ++i, ++row)
            std::copy_n(cache.representation().row(i), rep_dim,
                        all_reps.row(row));
        }
        stacked = Matrix(static_cast<int>(rows.size()), rep_dim);
        for (std::size_t i = 0; i < rows.size(); ++i)
          std::copy_n(all_reps.row(rows[i]), rep_dim,
                      stacked.row(static_cast<int>(i)));
      }
      spec.kernel = KernelSpec::multi_rbf_median(stacked);
    }

    if (spec.use_acdm) {
      for (int step = 0; step < cfg.d_steps; ++step) {
        std::fill(disc_grad.begin(), disc_grad.end(), 0.0);
        discriminator_objective(model, disc, batches, spec, &disc_grad);
        for (std::size_t i = 0; i < disc_grad.size(); ++i) {
          disc_velocity[i] =
              cfg.momentum * disc_velocity[i] + disc_grad[i];
          disc.net().params()[i] += cfg.disc_lr * disc_velocity[i];  // ascent
        }
        result.disc_updates += 1;
      }
    }

    std::fill(grad.begin(), grad.end(), 0.0);
    std::vector<ComposedLossSpec::EnvTerms> env_terms;
    double cdm_value = 0.0;
    const double total =
        composed_loss(model, spec.use_acdm ? &disc : nullptr, batches, spec,
                      &grad, &env_terms, &cdm_value);
    if (!std::isfinite(total)) {
      result.failed = true;
      result.failure = "non-finite loss at iteration " + std::to_string(iter);
      break;
    }

    double step_scale = 1.0;
    if (cfg.rescale_large_penalty_weights)
      step_scale = 1.0 / std::max({1.0, spec.alpha, spec.beta});
    if (cfg.grad_clip_norm > 0.0) {
      double norm2 = 0.0;
      for (double g : grad) norm2 += g * g * step_scale * step_scale;
      const double norm = std::sqrt(norm2);
      if (norm > cfg.grad_clip_norm) step_scale *= cfg.grad_clip_norm / norm;
    }
    for (std::size_t i = 0; i < grad.size(); ++i) {
      velocity[i] = cfg.momentum * velocity[i] - grad[i] * step_scale;
      model.params()[i] += cfg.lr * velocity[i];
    }
    result.model_updates += 1;

    if (cfg.keep_iteration_log) {
      for (std::size_t e = 0; e < env_data.size(); ++e) {
        IterRow row;
        row.iteration = iter;
        row.env_id = env_data[e].env_id;
        row.risk = env_terms[e].risk;
        row.irm_penalty = env_terms[e].irm_penalty;
        row.cdm_penalty = cdm_value;
        result.log.push_back(row);
      }
    }

    const bool is_checkpoint =
        iter % cfg.checkpoint_every == 0 || iter == cfg.iterations - 1;
    if (is_checkpoint && (iter >= eligible_from || iter == cfg.iterations - 1)) {
      const double val = validation_loss(model);
      if (!std::isfinite(val)) {
        result.failed = true;
        result.failure = "non-finite validation loss at iteration " +
                         std::to_string(iter);
        break;
      }
      result.checkpoints.push_back({iter, val});
      if (cfg.keep_iteration_log && !result.log.empty()) {
        for (std::size_t e = 0; e < env_data.size(); ++e) {
          IterRow& row = result.log[result.log.size() - 1 - e];
          row.has_val_loss = true;
          row.val_loss = val;
        }
      }
      if (val < best_val) {
        best_val = val;
        best_iteration = iter;
        best_params = model.params();
      }
    }
  }

  if (result.failed) return result;

  if (best_iteration >= 0) model.params() = best_params;
  result.selected_iteration = best_iteration;
  result.selected_val_loss = best_val;
  result.train_acc = accuracy_of(model, train_rows_all, cfg.loss_kind);
  result.val_acc = accuracy_of(model, val_rows, cfg.loss_kind);
  result.test_acc = accuracy_of(model, test_rows, cfg.loss_kind);
  return result;
}

GridSearchResult grid_search(std::span<const Dataset> datasets, Method method,
                             const HyperGrid& grid, const TrainConfig& base,
                             int n_jobs) {
  if (datasets.empty())
    throw std::invalid_argument("grid_search: no datasets");
  const std::vector<double> alphas =
      method_uses_irm(method) ? grid.alpha_grid : std::vector<double>{0.0};
  const std::vector<double> betas =
      (method_uses_mmd(method) || method_uses_acdm(method))
          ? grid.beta_grid
          : std::vector<double>{0.0};
  const std::vector<int> ks =
      method_uses_irm(method) ? grid.k_irm_grid : std::vector<int>{0};
  if (alphas.empty() || betas.empty() || ks.empty())
    throw std::invalid_argument("grid_search: empty grid");

  struct Task {
    int point;
    int seed_index;
  };
  std::vector<GridPointResult> points;
  std::vector<TrainConfig> configs;
  for (double alpha : alphas)
    for (double beta : betas)
      for (int k : ks) {
        GridPointResult point;
        point.alpha = alpha;
        point.beta = beta;
        point.k_irm = k;
        point.runs.resize(datasets.size());
        points.push_back(std::move(point));
        TrainConfig cfg = base;
        cfg.method = method;
        cfg.alpha = alpha;
        cfg.beta = beta;
        cfg.k_irm = k;
        cfg.keep_iteration_log = false;
        configs.push_back(cfg);
      }

  std::vector<Task> tasks;
  for (std::size_t p = 0; p < points.size(); ++p)
    for (std::size_t s = 0; s < datasets.size(); ++s)
      tasks.push_back({static_cast<int>(p), static_cast<int>(s)});

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      const Task& task = tasks[t];
      TrainConfig cfg = configs[task.point];
      cfg.seed = base.seed + static_cast<std::uint64_t>(task.seed_index);
      points[task.point].runs[task.seed_index] =
          train_run(datasets[task.seed_index], cfg);
    }
  };
  const int threads = std::max(1, n_jobs);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (auto& point : points) {
    double val_sum = 0.0, val_acc_sum = 0.0, test_sum = 0.0, test_sq = 0.0;
    int ok = 0;
    for (const RunResult& run : point.runs) {
      if (run.failed) {
        point.failed_runs += 1;
        continue;
      }
      val_sum += run.selected_val_loss;
      val_acc_sum += run.val_acc;
      test_sum += run.test_acc;
      test_sq += run.test_acc * run.test_acc;
      ok += 1;
    }
    if (ok > 0) {
      point.mean_val_loss = val_sum / ok;
      point.mean_val_acc = val_acc_sum / ok;
      point.mean_test_acc = test_sum / ok;
      const double var = std::max(0.0, test_sq / ok - point.mean_test_acc *
                                                          point.mean_test_acc);
      point.std_test_acc = std::sqrt(var);
    } else {
      point.mean_val_loss = std::numeric_limits<double>::infinity();
    }
  }

  GridSearchResult result;
  result.points = points;
  const GridPointResult* best = nullptr;
  for (const auto& point : points) {
    if (point.failed_runs == static_cast<int>(point.runs.size())) continue;
    if (!best || point.mean_val_loss < best->mean_val_loss) best = &point;
  }
  if (!best)
    throw std::runtime_error("grid_search: every run at every point failed");
  result.best = *best;
  return result;
}

}  // namespace irmlab
