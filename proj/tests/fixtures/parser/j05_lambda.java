public List<String> names(Collection<? extends Person> people) {
    return people.stream()
        .filter(p -> p != null && p.getAge() > 18)
        .map(Person::getName)
        .sorted((a, b) -> {
            int r = a.compareToIgnoreCase(b);
            return r != 0 ? r : a.compareTo(b);
        })
        .collect(Collectors.toList());
}
