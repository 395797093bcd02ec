package alpha;

class BlankLineGap {
    void tidy(Store s) {
        s.lock();
        // workaround for the stale lock file

        if (s.stale()) {
            s.unlock();
        }
    }
}
