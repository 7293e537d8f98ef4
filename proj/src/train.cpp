#include "semg/train.hpp"

#include <cstdio>

namespace semg {

void TrainLog::write_csv(std::ostream& os) const {
    os << "epoch,train_loss,val_loss,lr\n";
    char buf[128];
    for (const EpochRow& r : epochs) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", r.epoch, r.train_loss, r.val_loss, r.lr);
        os << buf;
    }
}

} // namespace semg
