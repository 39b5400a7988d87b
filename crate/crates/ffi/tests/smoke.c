#include <stdio.h>
#include <string.h>
#include "ksc.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        KscStatus s_ = (call);                                             \
        if (s_ != KSC_STATUS_OK) {                                         \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_, ksc_last_error()); \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(int argc, char **argv) {
    enum { N = 120 };
    double values[N * 2];
    int64_t truth[N];
    for (int i = 0; i < N; i++) {
        values[2 * i] = (i % 2) * 6.0 + (i % 7) * 0.05;
        values[2 * i + 1] = (i % 5) * 0.05;
        truth[i] = i % 2;
    }
    KscDataset *ds = NULL;
    CHECK(ksc_dataset_new(values, N, 2, truth, &ds));

    KscTrainOptions opts;
    ksc_train_options_default(&opts);
    opts.param = 2.0;
    KscModel *model = NULL;
    CHECK(ksc_train(ds, &opts, &model));
    CHECK(ksc_model_save(model, argv[1]));
    ksc_model_free(model);
    CHECK(ksc_model_load(argv[1], &model));

    size_t labels[N];
    int64_t predicted[N];
    CHECK(ksc_model_predict(model, ds, labels, N));
    for (int i = 0; i < N; i++) predicted[i] = (int64_t)labels[i];
    double ari = 0.0;
    CHECK(ksc_adjusted_rand_index(truth, predicted, N, &ari));

    KscStatus bad = ksc_model_load("/nonexistent/model", &model);
    printf("ari=%.6f bad=%d msg=%s\n", ari, (int)bad, ksc_last_error());
    ksc_dataset_free(ds);
    return ari == 1.0 && bad == KSC_STATUS_IO && model == NULL ? 0 : 1;
}
