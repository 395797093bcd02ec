package alpha;

class SameColumn {
    void load(Config c) {
        c.reset();
        // the cache is rebuilt on every call
        if (c.cache == null) {
            c.cache = new Cache();
        }
        c.touch();
        /* ugly but the api offers nothing else */
        if (c.dirty) { c.flush(); }
    }
}
