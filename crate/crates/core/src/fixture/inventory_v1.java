public class Inventory {
    private int capacity;
    private int count;
    private int reserved;

    /**
     * Adds items when the capacity allows it.
     */
    public void add(int amount) {
        // reject amounts above the capacity
        if (count + amount > capacity) {
            throw new IllegalStateException("full");
        }
        // increase the count
        count = count + amount;
    }

    /**
     * Removes items from the count.
     */
    public void remove(int amount) {
        // lower the count by the amount
        count = count - amount;
    }

    public int available() {
        // capacity minus count minus reserved
        int free = capacity - count - reserved;
        return free;
    }
}
