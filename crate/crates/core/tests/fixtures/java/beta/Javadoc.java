package beta;

class Javadoc {
    /**
     * Parses the header.
     */
    Header parse(byte[] raw) {
        Header h = new Header();
        /**
         * nuke the old header when the magic is wrong
         */
        if (raw[0] != MAGIC) {
            h = null;
        }
        return h;
    }
}
