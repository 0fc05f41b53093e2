public class Ledger {
    private long total;

    /**
     * Records a payment of the given value.
     */
    public void record(long value) {
        // add the value to the total
        total = total + value;
        // log the payment value
        System.out.println("paid " + value);
    }
}
