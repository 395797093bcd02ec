package alpha;

class ElseIfChain {
    String describe(int code) {
        String s;
        // hack: map codes by hand until the table loads
        if (code == 200) {
            s = "ok";
        } else if (code == 404) {
            s = "missing";
        } else if (code >= 500) {
            s = "server";
        } else {
            s = "other";
        }
        return s;
    }

    boolean even(int x) {
        return x % 2 == 0;
    }

    int sign(int x) {
        // returns the sign of x
        if (x > 0) return 1;
        else if (x < 0) return -1;
        else return 0;
    }
}
