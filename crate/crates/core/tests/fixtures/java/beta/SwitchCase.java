package beta;

class SwitchCase {
    int score(char c) {
        switch (c) {
            case 'a':
                // vowels score double
                if (bonus) return 2;
                return 1;
            default:
                return 0;
        }
    }
}
